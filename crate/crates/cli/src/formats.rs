//! On-disk formats: corpora, merge tables, translation tables, Pharaoh
//! alignments, lexicons and augmented corpora.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use progtrans_core::corpus::{parse_lines, parse_lines_allow_empty, sentences_to_text, text_lines};
use progtrans_core::{
    AugmentedExample, BilingualLexicon, CorpusError, DirectionalAlignment, Direction, MergeTable,
    OneToOneAlignment, ParallelCorpus, Sentence, Side, TranslationTable, NULL_WORD,
};

/// First line of every merge table file.
pub const MERGE_TABLE_HEADER: &str = "#version: 0.2";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Corpus { path: PathBuf, source: CorpusError },
    #[error("{path}:{line}: {message}")]
    Syntax { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Structure { path: PathBuf, message: String },
}

impl FormatError {
    fn syntax(path: &Path, line: usize, message: impl Into<String>) -> Self {
        FormatError::Syntax { path: path.to_path_buf(), line, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, FormatError>;

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub fn read_text(path: &Path) -> Result<String> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|e| {
        FormatError::Structure {
            path: path.to_path_buf(),
            message: format!("not valid UTF-8 at byte offset {}", e.utf8_error().valid_up_to()),
        }
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|source| FormatError::Io { path: parent.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

/// Loads a line-aligned parallel corpus.
pub fn load_parallel(src: &Path, tgt: &Path) -> Result<ParallelCorpus> {
    let src_bytes = read_bytes(src)?;
    let tgt_bytes = read_bytes(tgt)?;
    ParallelCorpus::parse(&src_bytes, &tgt_bytes).map_err(|e| {
        let path = match &e {
            CorpusError::Decode { side: Side::Target, .. }
            | CorpusError::EmptyLine { side: Side::Target, .. }
            | CorpusError::InvalidTokenAt { side: Side::Target, .. } => tgt,
            CorpusError::LineCountMismatch { .. } => {
                return FormatError::Structure {
                    path: src.to_path_buf(),
                    message: format!("{e} ({})", tgt.display()),
                }
            }
            _ => src,
        };
        FormatError::Corpus { path: path.to_path_buf(), source: e }
    })
}

pub fn write_parallel(corpus: &ParallelCorpus, src: &Path, tgt: &Path) -> Result<()> {
    write_text(src, &corpus.side_text(Side::Source))?;
    write_text(tgt, &corpus.side_text(Side::Target))
}

/// Reads one sentence per line. With `allow_empty`, blank lines are empty
/// sentences instead of errors.
pub fn read_sentences(path: &Path, side: Side, allow_empty: bool) -> Result<Vec<Sentence>> {
    let bytes = read_bytes(path)?;
    let parsed = if allow_empty {
        parse_lines_allow_empty(&bytes, side)
    } else {
        parse_lines(&bytes, side)
    };
    parsed.map_err(|source| FormatError::Corpus { path: path.to_path_buf(), source })
}

pub fn write_sentences<'a>(path: &Path, sentences: impl IntoIterator<Item = &'a Sentence>) -> Result<()> {
    write_text(path, &sentences_to_text(sentences))
}

/// Reads whitespace-separated token lines without validation (decoder
/// outputs may contain markers and control tokens).
pub fn read_token_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = read_text(path)?;
    Ok(text_lines(&text)
        .map(|line| line.split_whitespace().map(str::to_string).collect())
        .collect())
}

pub fn write_token_lines<S: AsRef<str>>(path: &Path, lines: &[Vec<S>]) -> Result<()> {
    let mut out = String::new();
    for line in lines {
        for (i, t) in line.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(t.as_ref());
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn merge_table_to_text(table: &MergeTable) -> String {
    let mut out = String::from(MERGE_TABLE_HEADER);
    out.push('\n');
    for (left, right) in table.merges() {
        let _ = writeln!(out, "{left} {right}");
    }
    out
}

pub fn write_merge_table(path: &Path, table: &MergeTable) -> Result<()> {
    write_text(path, &merge_table_to_text(table))
}

pub fn read_merge_table(path: &Path) -> Result<MergeTable> {
    let text = read_text(path)?;
    let mut lines = text_lines(&text).enumerate();
    match lines.next() {
        Some((_, first)) if first.starts_with('#') => {}
        _ => return Err(FormatError::syntax(path, 1, "missing '#' version header")),
    }
    let mut merges = Vec::new();
    for (i, line) in lines {
        let parts: Vec<&str> = line.split(' ').collect();
        match parts.as_slice() {
            [left, right] if !left.is_empty() && !right.is_empty() => {
                merges.push((left.to_string(), right.to_string()))
            }
            _ => return Err(FormatError::syntax(path, i + 1, format!("expected \"left right\", got {line:?}"))),
        }
    }
    MergeTable::new(merges).map_err(|e| FormatError::Structure { path: path.to_path_buf(), message: e.to_string() })
}

/// `e f prob` lines sorted by `(e, f)`; the NULL word is written as `<null>`.
pub fn translation_table_to_text(table: &TranslationTable) -> String {
    let mut rows: Vec<(&str, &str, f64)> =
        table.entries().map(|(e, f, p)| (e.unwrap_or(NULL_WORD), f, p)).collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out = String::new();
    for (e, f, p) in rows {
        let _ = writeln!(out, "{e} {f} {p}");
    }
    out
}

pub fn write_translation_table(path: &Path, table: &TranslationTable) -> Result<()> {
    write_text(path, &translation_table_to_text(table))
}

pub fn read_translation_table(path: &Path, direction: Direction) -> Result<TranslationTable> {
    let text = read_text(path)?;
    let mut entries = Vec::new();
    for (i, line) in text_lines(&text).enumerate() {
        let parts: Vec<&str> = line.split(' ').collect();
        let [e, f, p] = parts.as_slice() else {
            return Err(FormatError::syntax(path, i + 1, "expected \"e f prob\""));
        };
        let p: f64 = p.parse().map_err(|_| FormatError::syntax(path, i + 1, format!("bad probability {p:?}")))?;
        let e = (*e != NULL_WORD).then(|| e.to_string());
        entries.push((e, f.to_string(), p));
    }
    TranslationTable::from_entries(direction, entries)
        .map_err(|e| FormatError::Structure { path: path.to_path_buf(), message: e.to_string() })
}

/// Space-separated `i-j` links.
pub fn format_links(links: impl IntoIterator<Item = (usize, usize)>) -> String {
    let mut out = String::new();
    for (k, (i, j)) in links.into_iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{i}-{j}");
    }
    out
}

pub fn parse_links(line: &str) -> std::result::Result<Vec<(usize, usize)>, String> {
    line.split_whitespace()
        .map(|link| {
            let (i, j) = link.split_once('-').ok_or_else(|| format!("bad link {link:?}"))?;
            let i = i.parse().map_err(|_| format!("bad link {link:?}"))?;
            let j = j.parse().map_err(|_| format!("bad link {link:?}"))?;
            Ok((i, j))
        })
        .collect()
}

/// Pharaoh lines with the conditioning-side index first.
pub fn directional_to_text(alignments: &[DirectionalAlignment]) -> String {
    let mut out = String::new();
    for a in alignments {
        out.push_str(&format_links(a.pairs()));
        out.push('\n');
    }
    out
}

pub fn write_directional(path: &Path, alignments: &[DirectionalAlignment]) -> Result<()> {
    write_text(path, &directional_to_text(alignments))
}

/// Reads a directional Pharaoh file; sentence lengths come from `corpus`.
pub fn read_directional(
    path: &Path,
    direction: Direction,
    corpus: &ParallelCorpus,
) -> Result<Vec<DirectionalAlignment>> {
    let text = read_text(path)?;
    let lines: Vec<&str> = text_lines(&text).collect();
    if lines.len() != corpus.len() {
        return Err(FormatError::Structure {
            path: path.to_path_buf(),
            message: format!("{} alignment lines for {} sentence pairs", lines.len(), corpus.len()),
        });
    }
    lines
        .iter()
        .zip(corpus.pairs())
        .enumerate()
        .map(|(n, (line, (source, target)))| {
            let (cond, emit) = direction.split(source, target);
            let mut links = vec![None; emit.len()];
            for (c, e) in parse_links(line).map_err(|m| FormatError::syntax(path, n + 1, m))? {
                if e >= emit.len() {
                    return Err(FormatError::syntax(path, n + 1, format!("link {c}-{e} is out of range")));
                }
                if links[e].replace(c).is_some() {
                    return Err(FormatError::syntax(path, n + 1, format!("position {e} is linked twice")));
                }
            }
            DirectionalAlignment::new(direction, cond.len(), links)
                .map_err(|err| FormatError::syntax(path, n + 1, err.to_string()))
        })
        .collect()
}

/// Pharaoh lines with the source index first.
pub fn symmetric_to_text(alignments: &[OneToOneAlignment]) -> String {
    let mut out = String::new();
    for a in alignments {
        out.push_str(&format_links(a.links().iter().copied()));
        out.push('\n');
    }
    out
}

pub fn write_symmetric(path: &Path, alignments: &[OneToOneAlignment]) -> Result<()> {
    write_text(path, &symmetric_to_text(alignments))
}

pub fn read_symmetric(path: &Path) -> Result<Vec<OneToOneAlignment>> {
    let text = read_text(path)?;
    text_lines(&text)
        .enumerate()
        .map(|(n, line)| {
            let links = parse_links(line).map_err(|m| FormatError::syntax(path, n + 1, m))?;
            OneToOneAlignment::new(links).map_err(|e| FormatError::syntax(path, n + 1, e.to_string()))
        })
        .collect()
}

/// `source<TAB>target<TAB>count`, sorted by source word.
pub fn lexicon_to_text(lexicon: &BilingualLexicon) -> String {
    let mut out = String::new();
    for (s, t, c) in lexicon.iter() {
        let _ = writeln!(out, "{s}\t{t}\t{c}");
    }
    out
}

pub fn write_lexicon(path: &Path, lexicon: &BilingualLexicon) -> Result<()> {
    write_text(path, &lexicon_to_text(lexicon))
}

/// The file does not carry the total link count; the sum of the winning
/// counts is used instead.
pub fn read_lexicon(path: &Path) -> Result<BilingualLexicon> {
    let text = read_text(path)?;
    let mut entries = Vec::new();
    let mut total = 0;
    for (n, line) in text_lines(&text).enumerate() {
        let parts: Vec<&str> = line.split('\t').collect();
        let [s, t, c] = parts.as_slice() else {
            return Err(FormatError::syntax(path, n + 1, "expected source<TAB>target<TAB>count"));
        };
        let c: u64 = c.parse().map_err(|_| FormatError::syntax(path, n + 1, format!("bad count {c:?}")))?;
        total += c;
        entries.push((s.to_string(), t.to_string(), c));
    }
    Ok(BilingualLexicon::from_entries(entries, total))
}

/// Paths of an augmented corpus sharing one prefix.
#[derive(Debug, Clone)]
pub struct AugmentedPaths {
    pub source: PathBuf,
    pub target: PathBuf,
    pub manifest: PathBuf,
}

impl AugmentedPaths {
    pub fn with_prefix(prefix: &Path) -> Self {
        let with = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        AugmentedPaths { source: with(".src"), target: with(".tgt"), manifest: with(".manifest") }
    }
}

/// Source lines, target lines and the per-example manifest
/// (`sentence_id<TAB>order<TAB>len…`).
pub fn augmented_to_text(examples: &[AugmentedExample]) -> (String, String, String) {
    let (mut src, mut tgt, mut manifest) = (String::new(), String::new(), String::new());
    for ex in examples {
        src.push_str(&ex.source.join(" "));
        src.push('\n');
        tgt.push_str(&ex.target.join(" "));
        tgt.push('\n');
        let _ = write!(manifest, "{}\t{}", ex.sentence_id, ex.order_digits());
        for len in &ex.segment_lengths {
            let _ = write!(manifest, "\t{len}");
        }
        manifest.push('\n');
    }
    (src, tgt, manifest)
}

pub fn write_augmented(paths: &AugmentedPaths, examples: &[AugmentedExample]) -> Result<()> {
    let (src, tgt, manifest) = augmented_to_text(examples);
    write_text(&paths.source, &src)?;
    write_text(&paths.target, &tgt)?;
    write_text(&paths.manifest, &manifest)
}
