//! Minimal BRAT-like standoff dialect.
//!
//! ```text
//! T1\tTimeDescriptor 4 14\tremains on
//! T2\tEndocrineTherapy 15 23\tArimidex
//! R1\tTherapyTiming Arg1:T1 Arg2:T2
//! ```
//!
//! Offsets are character offsets into the UTF-8 text file, half-open.
//! Control whitespace inside a surface is written as a plain space.

use std::fs;
use std::path::Path;

use super::{Corpus, CorpusError, Document, EntityMention, RelationAnnotation, Result, Schema};

pub const SCHEMA_FILE: &str = "schema.json";

fn flatten(surface: &str) -> String {
    surface
        .chars()
        .map(|c| if matches!(c, '\n' | '\r' | '\t') { ' ' } else { c })
        .collect()
}

/// Parses a document from its text and annotation contents.
pub fn parse_standoff(id: &str, text: &str, ann: &str, schema: &Schema) -> Result<Document> {
    let mut doc = Document {
        id: id.to_string(),
        text: text.to_string(),
        mentions: Vec::new(),
        relations: Vec::new(),
    };
    let parse_err = |line: usize, message: String| CorpusError::Parse {
        file: format!("{id}.ann"),
        line,
        message,
    };
    for (i, raw) in ann.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let ident = fields.next().unwrap_or_default();
        let body = fields
            .next()
            .ok_or_else(|| parse_err(lineno, "expected a tab after the record id".into()))?;
        if ident.len() < 2 || ident.chars().any(char::is_whitespace) {
            return Err(parse_err(lineno, format!("malformed record id {ident:?}")));
        }
        match ident.as_bytes()[0] {
            b'T' => {
                let surface = fields
                    .next()
                    .ok_or_else(|| parse_err(lineno, "entity record lacks a surface field".into()))?;
                let parts: Vec<&str> = body.split(' ').collect();
                if parts.len() != 3 {
                    return Err(parse_err(
                        lineno,
                        format!("expected `<Type> <start> <end>`, found {body:?}"),
                    ));
                }
                let offset = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| parse_err(lineno, format!("invalid offset {s:?}")))
                };
                let (start, end) = (offset(parts[1])?, offset(parts[2])?);
                let len = doc.char_len();
                if start >= end || end > len {
                    return Err(CorpusError::Integrity {
                        document: id.to_string(),
                        message: format!(
                            "line {lineno}: span {start}..{end} out of bounds for text of {len} characters"
                        ),
                    });
                }
                let actual = doc.slice(start, end);
                if flatten(actual) != surface {
                    return Err(CorpusError::Integrity {
                        document: id.to_string(),
                        message: format!(
                            "line {lineno}: surface {surface:?} does not match text {actual:?}"
                        ),
                    });
                }
                let actual = actual.to_string();
                doc.mentions.push(EntityMention {
                    id: ident.to_string(),
                    entity_type: parts[0].to_string(),
                    start,
                    end,
                    surface: actual,
                });
            }
            b'R' => {
                if fields.next().is_some() {
                    return Err(parse_err(lineno, "unexpected third field in relation record".into()));
                }
                let parts: Vec<&str> = body.split(' ').collect();
                let arg = |s: &str, key: &str| {
                    s.strip_prefix(key)
                        .filter(|rest| !rest.is_empty())
                        .map(str::to_string)
                        .ok_or_else(|| parse_err(lineno, format!("expected {key}<id>, found {s:?}")))
                };
                if parts.len() != 3 {
                    return Err(parse_err(
                        lineno,
                        format!("expected `<Relation> Arg1:<id> Arg2:<id>`, found {body:?}"),
                    ));
                }
                doc.relations.push(RelationAnnotation {
                    id: ident.to_string(),
                    relation: parts[0].to_string(),
                    left: arg(parts[1], "Arg1:")?,
                    right: arg(parts[2], "Arg2:")?,
                });
            }
            _ => return Err(parse_err(lineno, format!("unknown record kind {ident:?}"))),
        }
    }
    doc.validate(schema)?;
    Ok(doc)
}

/// Reads one document; its id is the text file's stem.
pub fn load_standoff(text_path: &Path, ann_path: &Path, schema: &Schema) -> Result<Document> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|source| CorpusError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let id = text_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| CorpusError::Integrity {
            document: text_path.display().to_string(),
            message: "text file name is not valid UTF-8".into(),
        })?;
    parse_standoff(id, &read(text_path)?, &read(ann_path)?, schema)
}

/// Renders a document as (text content, annotation content).
pub fn write_standoff(doc: &Document) -> (String, String) {
    let mut ann = String::new();
    for m in &doc.mentions {
        ann.push_str(&format!(
            "{}\t{} {} {}\t{}\n",
            m.id,
            m.entity_type,
            m.start,
            m.end,
            flatten(&m.surface)
        ));
    }
    for r in &doc.relations {
        ann.push_str(&format!("{}\t{} Arg1:{} Arg2:{}\n", r.id, r.relation, r.left, r.right));
    }
    (doc.text.clone(), ann)
}

/// Loads `schema.json` plus every `<id>.txt` / `<id>.ann` pair in `dir`,
/// ordered by document id. A missing `.ann` file means no annotations.
pub fn load_corpus(dir: &Path) -> Result<Corpus> {
    let schema = Schema::load(&dir.join(SCHEMA_FILE))?;
    let io = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut texts: Vec<_> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    texts.sort();
    let mut documents = Vec::with_capacity(texts.len());
    for t in texts {
        let ann = t.with_extension("ann");
        let doc = if ann.exists() {
            load_standoff(&t, &ann, &schema)?
        } else {
            let id = t.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let text = fs::read_to_string(&t).map_err(|source| CorpusError::Io {
                path: t.clone(),
                source,
            })?;
            parse_standoff(id, &text, "", &schema)?
        };
        documents.push(doc);
    }
    Corpus::new(schema, documents)
}

pub fn write_corpus(dir: &Path, corpus: &Corpus) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let schema_path = dir.join(SCHEMA_FILE);
    fs::write(&schema_path, corpus.schema.to_json()).map_err(io(&schema_path))?;
    for d in &corpus.documents {
        let (text, ann) = write_standoff(d);
        let tp = dir.join(format!("{}.txt", d.id));
        let ap = dir.join(format!("{}.ann", d.id));
        fs::write(&tp, text).map_err(io(&tp))?;
        fs::write(&ap, ann).map_err(io(&ap))?;
    }
    Ok(())
}
