//! Static site emission from a [`DocDatabase`].

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pulldown_cmark::{html::push_html, CowStr, Event, Parser, Tag};
use pulldown_cmark_escape::escape_html;
use rayon::prelude::*;

use super::{emit_json, note_slug, DocDatabase, DocEntry, DocError, ModuleRecord};
use crate::env::DocCategory;

const PAGE_TEMPLATE: &str = include_str!("../../templates/page.html");
pub const ASSET_STYLE: &str = include_str!("../../templates/style.css");

/// Site-relative path of the page documenting `file`.
pub fn page_path(file: &str) -> String {
    let stem = file.strip_suffix(".lean").unwrap_or(file);
    let sanitized: String = stem
        .chars()
        .map(|c| match c {
            '/' | '\\' => '.',
            c if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') => c,
            _ => '_',
        })
        .collect();
    format!("module/{sanitized}.html")
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_html(&mut out, s).expect("writing to a String");
    out
}

/// Fills `{{key}}` placeholders in one pass, so substituted text is never rescanned.
fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find("}}").and_then(|end| values.iter().find(|(k, _)| *k == &after[..end]).map(|(_, v)| (end, v))) {
            Some((end, value)) => {
                out.push_str(value);
                rest = &after[end + 2..];
            }
            None => {
                out.push_str("{{");
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Markdown to HTML, pointing note links at the notes page.
fn markdown(text: &str, root: &str) -> String {
    let events = Parser::new(text).map(|event| match event {
        Event::Start(Tag::Link { link_type, dest_url, title, id }) if dest_url.starts_with("#note-") => {
            let dest_url = CowStr::from(format!("{root}notes.html{dest_url}"));
            Event::Start(Tag::Link { link_type, dest_url, title, id })
        }
        Event::Html(raw) | Event::InlineHtml(raw) => Event::Text(raw),
        other => other,
    });
    let mut out = String::new();
    push_html(&mut out, events);
    out
}

struct Site<'a> {
    db: &'a DocDatabase,
    hrefs: HashMap<&'a str, &'a str>,
}

impl Site<'_> {
    fn page(&self, title: &str, page: &str, content: &str) -> String {
        let root = "../".repeat(page.matches('/').count());
        let mut nav = String::new();
        for e in &self.db.index {
            let _ = writeln!(nav, "<li><a href=\"{root}{}\">{}</a></li>", esc(&e.href), esc(&e.name));
        }
        fill(PAGE_TEMPLATE, &[("title", &esc(title)), ("root", &root), ("page", &esc(page)), ("nav", &nav), ("content", content)])
    }

    fn name_link(&self, name: &str, root: &str) -> String {
        match self.hrefs.get(name) {
            Some(href) => format!("<a href=\"{root}{}\">{}</a>", esc(href), esc(name)),
            None => format!("<span>{}</span>", esc(name)),
        }
    }

    fn entry(&self, e: &DocEntry, root: &str) -> String {
        let mut h = String::new();
        let _ = writeln!(h, "<div class=\"decl kind-{kind}\" id=\"{id}\" data-kind=\"{kind}\">", kind = esc(&e.kind), id = esc(&e.name));
        let _ = write!(
            h,
            "<div class=\"decl-header\"><span class=\"decl-kind\">{}</span> <a class=\"decl-name\" href=\"#{id}\">{id}</a>",
            esc(&e.kind),
            id = esc(&e.name)
        );
        for a in &e.attrs {
            let _ = write!(h, " <span class=\"attr\">@[{}]</span>", esc(a));
        }
        h.push_str("</div>\n");
        let _ = write!(
            h,
            "<div class=\"decl-type\" data-compact=\"{}\" data-full=\"{}\"><code class=\"type-text\">{}</code>",
            esc(&e.type_compact),
            esc(&e.type_full),
            esc(&e.type_compact)
        );
        if e.type_compact != e.type_full {
            h.push_str(" <button class=\"expand-implicits\" type=\"button\" aria-expanded=\"false\">{…}</button>");
        }
        h.push_str("</div>\n");
        if let Some(doc) = &e.doc {
            let _ = writeln!(h, "<div class=\"decl-doc\">{}</div>", markdown(doc, root));
        }
        if !e.members.is_empty() {
            h.push_str("<ul class=\"members\">\n");
            for m in &e.members {
                let _ = writeln!(
                    h,
                    "<li id=\"{n}\" class=\"member\" data-compact=\"{c}\" data-full=\"{f}\"><code>{n} : <span class=\"type-text\">{c}</span></code></li>",
                    n = esc(&m.name),
                    c = esc(&m.type_compact),
                    f = esc(&m.type_full)
                );
            }
            h.push_str("</ul>\n");
        }
        let mut list = |class: &str, label: &str, names: &[String]| {
            let _ = writeln!(h, "<details class=\"{class}\"><summary>{label} ({})</summary><ul>", names.len());
            for n in names {
                let _ = writeln!(h, "<li>{}</li>", self.name_link(n, root));
            }
            h.push_str("</ul></details>\n");
        };
        if let Some(instances) = &e.instances {
            list("instances", "Instances", instances);
        }
        if !e.eq_lemmas.is_empty() {
            list("eq-lemmas", "Equations", &e.eq_lemmas);
        }
        let _ = writeln!(h, "<div class=\"decl-source\" data-file=\"{f}\" data-line=\"{l}\">{f}:{l}</div>", f = esc(&e.file), l = e.line);
        h.push_str("</div>\n");
        h
    }

    fn module_page(&self, m: &ModuleRecord) -> (String, String) {
        let page = page_path(&m.file);
        let root = "../";
        let mut content = String::new();
        if let Some(doc) = &m.doc {
            let _ = writeln!(content, "<div class=\"module-doc\">{}</div>", markdown(doc, root));
        }
        for e in &m.decls {
            content.push_str(&self.entry(e, root));
        }
        let html = self.page(&m.file, &page, &content);
        (page, html)
    }

    fn tactic_page(&self, category: DocCategory) -> (String, String) {
        let page = format!("tactics/{}.html", category.as_str());
        let root = "../";
        let entries: Vec<_> = self.db.tactic_docs.iter().filter(|t| t.category == category).collect();
        let tags: BTreeSet<&str> = entries.iter().flat_map(|t| t.tags.iter().map(String::as_str)).collect();
        let mut content = String::from("<div class=\"tag-filter\">\n");
        for tag in &tags {
            let _ = writeln!(content, "<label><input type=\"checkbox\" class=\"tag-toggle\" value=\"{t}\"> {t}</label>", t = esc(tag));
        }
        content.push_str("</div>\n");
        for t in entries {
            let tags_json = serde_json::to_string(&t.tags).expect("tags serialize");
            let _ = writeln!(content, "<div class=\"tactic-entry\" id=\"{}\" data-tags=\"{}\">", esc(&t.name), esc(&tags_json));
            let _ = writeln!(content, "<h2>{}</h2>", esc(&t.name));
            if !t.tags.is_empty() {
                content.push_str("<div class=\"tags\">");
                for tag in &t.tags {
                    let _ = write!(content, "<span class=\"tag\">{}</span>", esc(tag));
                }
                content.push_str("</div>\n");
            }
            let _ = writeln!(content, "<div class=\"tactic-doc\">{}</div>", markdown(&t.description, root));
            if !t.decl_names.is_empty() {
                content.push_str("<div class=\"related\">Related declarations: ");
                let links: Vec<String> = t.decl_names.iter().map(|n| self.name_link(n, root)).collect();
                content.push_str(&links.join(", "));
                content.push_str("</div>\n");
            }
            content.push_str("</div>\n");
        }
        let title = match category {
            DocCategory::Tactic => "Tactics",
            DocCategory::Command => "Commands",
            DocCategory::HoleCommand => "Hole commands",
            DocCategory::Attribute => "Attributes",
        };
        let html = self.page(title, &page, &content);
        (page, html)
    }

    fn notes_page(&self) -> (String, String) {
        let mut content = String::new();
        for n in &self.db.notes {
            let _ = writeln!(content, "<div class=\"note\" id=\"{}\">", note_slug(&n.name));
            let _ = writeln!(content, "<h2>{}</h2>", esc(&n.name));
            content.push_str(&markdown(&n.content, ""));
            let _ = writeln!(content, "<div class=\"decl-source\">{}:{}</div>\n</div>", esc(&n.file), n.line);
        }
        ("notes.html".to_owned(), self.page("Library notes", "notes.html", &content))
    }

    fn index_page(&self) -> (String, String) {
        let mut content = String::from("<ul class=\"modules\">\n");
        for m in &self.db.modules {
            let _ = writeln!(
                content,
                "<li><a href=\"{}\">{}</a> ({} declarations)</li>",
                esc(&page_path(&m.file)),
                esc(&m.file),
                m.decls.len()
            );
        }
        content.push_str("</ul>\n");
        ("index.html".to_owned(), self.page("Library documentation", "index.html", &content))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), DocError> {
    let io = |source| DocError::IoFailure { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}

/// Writes the site under `out_dir`. Files found in `frontend_assets` are
/// copied into `assets/` next to the stylesheet. Returns the written paths
/// relative to `out_dir`, sorted.
pub fn emit_html(db: &DocDatabase, out_dir: &Path, frontend_assets: Option<&Path>, jobs: usize) -> Result<Vec<String>, DocError> {
    let site = Site { db, hrefs: db.index.iter().map(|e| (e.name.as_str(), e.href.as_str())).collect() };

    let render = |i: &usize| -> (String, String) {
        let n = db.modules.len();
        match *i {
            i if i < n => site.module_page(&db.modules[i]),
            i if i < n + DocCategory::ALL.len() => site.tactic_page(DocCategory::ALL[i - n]),
            _ => site.notes_page(),
        }
    };
    let jobs_range: Vec<usize> = (0..db.modules.len() + DocCategory::ALL.len() + 1).collect();
    let mut pages: Vec<(String, Vec<u8>)> = if jobs <= 1 {
        jobs_range.iter().map(render).map(|(p, h)| (p, h.into_bytes())).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| DocError::Pool(e.to_string()))?
            .install(|| jobs_range.par_iter().map(render).map(|(p, h)| (p, h.into_bytes())).collect())
    };
    pages.push(("db.json".to_owned(), emit_json(db)));
    pages.push(("assets/style.css".to_owned(), ASSET_STYLE.as_bytes().to_vec()));
    if let Some(dir) = frontend_assets {
        let io = |source| DocError::IoFailure { path: dir.to_path_buf(), source };
        let mut names: Vec<PathBuf> = fs::read_dir(dir).map_err(io)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>().map_err(io)?;
        names.sort();
        for path in names.into_iter().filter(|p| p.is_file()) {
            let bytes = fs::read(&path).map_err(|source| DocError::IoFailure { path: path.clone(), source })?;
            let name = path.file_name().expect("file has a name").to_string_lossy();
            pages.push((format!("assets/{name}"), bytes));
        }
    }

    for (rel, bytes) in &pages {
        write_file(&out_dir.join(rel), bytes)?;
    }
    let (index_path, index_html) = site.index_page();
    write_file(&out_dir.join(&index_path), index_html.as_bytes())?;

    let mut written: Vec<String> = pages.into_iter().map(|(p, _)| p).chain(std::iter::once(index_path)).collect();
    written.sort();
    written.dedup();
    Ok(written)
}
