//! Top-level structure extraction for C and C++ sources.
//!
//! A file is split into four disjoint kinds of byte ranges: include
//! directives (headers), other top-level declarations (globals), free
//! function definitions, and residue (whitespace and comments between
//! top-level items). Concatenating every range in offset order yields the
//! original text, which is what [`reconstruct`] does.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tree_sitter::{Node, Parser};

use crate::error::ExtractError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    C,
    Cpp,
}

impl Language {
    /// Tag used for fenced code blocks and in prompt text.
    pub fn name(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::Cpp => "cpp",
        }
    }

    pub fn from_extension(path: &Path) -> Result<Self, ExtractError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default()
            .to_ascii_lowercase();
        match ext.as_str() {
            "c" | "h" => Ok(Language::C),
            "cc" | "cpp" | "cxx" | "c++" | "hh" | "hpp" | "hxx" | "h++" | "ipp" | "inl" => {
                Ok(Language::Cpp)
            }
            _ => Err(ExtractError::UnsupportedLanguage(ext)),
        }
    }

    fn grammar(self) -> tree_sitter::Language {
        match self {
            Language::C => tree_sitter_c::LANGUAGE.into(),
            Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
        }
    }
}

impl FromStr for Language {
    type Err = ExtractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c" => Ok(Language::C),
            "cpp" | "c++" | "cxx" | "cc" => Ok(Language::Cpp),
            other => Err(ExtractError::UnsupportedLanguage(other.to_string())),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A source file decoded to text.
///
/// Bytes that are not valid UTF-8 are replaced one-for-one with `?` so that
/// byte offsets in `text` match the file on disk; the originals are kept in an
/// escape map and restored by [`SourceFile::to_bytes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub path: PathBuf,
    pub language: Language,
    pub text: String,
    escapes: Vec<(usize, u8)>,
}

const ESCAPE_PLACEHOLDER: char = '?';

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, language: Language, text: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            language,
            text: text.into(),
            escapes: Vec::new(),
        }
    }

    pub fn from_bytes(path: impl Into<PathBuf>, language: Language, bytes: &[u8]) -> Self {
        let mut text = String::with_capacity(bytes.len());
        let mut escapes = Vec::new();
        let mut rest = bytes;
        let mut offset = 0;
        loop {
            match std::str::from_utf8(rest) {
                Ok(valid) => {
                    text.push_str(valid);
                    break;
                }
                Err(err) => {
                    let valid_len = err.valid_up_to();
                    text.push_str(std::str::from_utf8(&rest[..valid_len]).unwrap());
                    let bad_len = err.error_len().unwrap_or(rest.len() - valid_len);
                    for (i, &b) in rest[valid_len..valid_len + bad_len].iter().enumerate() {
                        escapes.push((offset + valid_len + i, b));
                        text.push(ESCAPE_PLACEHOLDER);
                    }
                    offset += valid_len + bad_len;
                    rest = &rest[valid_len + bad_len..];
                }
            }
        }
        Self {
            path: path.into(),
            language,
            text,
            escapes,
        }
    }

    pub fn read(path: impl Into<PathBuf>, language: Language) -> Result<Self, ExtractError> {
        let path = path.into();
        let bytes = std::fs::read(&path).map_err(|source| ExtractError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(Self::from_bytes(path, language, &bytes))
    }

    pub fn is_lossy(&self) -> bool {
        !self.escapes.is_empty()
    }

    /// Offsets (into `text`) of bytes that were not valid UTF-8, with their original values.
    pub fn escapes(&self) -> &[(usize, u8)] {
        &self.escapes
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        restore_escapes(&self.text, &self.escapes)
    }
}

pub(crate) fn restore_escapes(text: &str, escapes: &[(usize, u8)]) -> Vec<u8> {
    let mut bytes = text.as_bytes().to_vec();
    for &(offset, byte) in escapes {
        bytes[offset] = byte;
    }
    bytes
}

/// Non-function top-level text: an include directive, a declaration, or residue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopLevelItem {
    pub span: Range<usize>,
    pub text: String,
    /// Names this declaration introduces; empty for headers and residue.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub declares: Vec<String>,
}

/// Block a function was found in when it is not directly at file scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Enclosing {
    LinkageBlock,
    AnonymousNamespace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionDef {
    pub name: String,
    /// Return type, name and parameter list as written, up to the body.
    pub qualified_signature: String,
    /// Byte range of the whole definition, signature included.
    pub body_span: Range<usize>,
    pub body_text: String,
    /// 1-based position among the file's functions.
    pub ordinal: usize,
    pub enclosing: Option<Enclosing>,
}

impl FunctionDef {
    /// Declaration suitable for a forward prototype.
    pub fn prototype(&self) -> String {
        format!("{};", self.qualified_signature)
    }
}

#[derive(Debug, Clone)]
pub struct FileContext {
    pub file: SourceFile,
    pub headers: Vec<TopLevelItem>,
    pub globals: Vec<TopLevelItem>,
    pub functions: Vec<FunctionDef>,
    pub residue: Vec<TopLevelItem>,
    /// Names declared at file scope: variables, types, macros, functions.
    pub global_symbols: Vec<String>,
}

impl FileContext {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_by_ordinal(&self, ordinal: usize) -> Option<&FunctionDef> {
        ordinal
            .checked_sub(1)
            .and_then(|i| self.functions.get(i))
            .filter(|f| f.ordinal == ordinal)
    }

    pub fn header_lines(&self) -> impl Iterator<Item = &str> {
        self.headers.iter().map(|h| h.text.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AtomKind {
    Header,
    Global,
    Function,
    Comment,
    Structural,
}

#[derive(Debug)]
struct Atom {
    kind: AtomKind,
    span: Range<usize>,
    enclosing: Option<Enclosing>,
    function: Option<(String, Range<usize>)>,
    declares: Vec<String>,
}

pub fn parse_file(src: &SourceFile) -> Result<FileContext, ExtractError> {
    let mut parser = Parser::new();
    parser
        .set_language(&src.language.grammar())
        .map_err(|_| ExtractError::ParseFailure(src.path.clone()))?;
    let tree = parser
        .parse(&src.text, None)
        .ok_or_else(|| ExtractError::ParseFailure(src.path.clone()))?;

    let bytes = src.text.as_bytes();
    let mut walker = Walker {
        text: &src.text,
        atoms: Vec::new(),
    };
    walker.container(tree.root_node(), None);
    let atoms = coalesce(walker.atoms, bytes);

    let mut ctx = FileContext {
        file: src.clone(),
        headers: Vec::new(),
        globals: Vec::new(),
        functions: Vec::new(),
        residue: Vec::new(),
        global_symbols: Vec::new(),
    };
    let item = |span: Range<usize>| TopLevelItem {
        text: src.text[span.clone()].to_string(),
        span,
        declares: Vec::new(),
    };
    let mut cursor = 0;
    let mut residue_start: Option<usize> = None;
    for atom in atoms {
        if atom.span.start > cursor {
            residue_start.get_or_insert(cursor);
        }
        if atom.kind == AtomKind::Comment {
            residue_start.get_or_insert(atom.span.start);
            cursor = atom.span.end;
            continue;
        }
        if let Some(start) = residue_start.take() {
            ctx.residue.push(item(start..atom.span.start));
        }
        match atom.kind {
            AtomKind::Header => ctx.headers.push(item(atom.span.clone())),
            AtomKind::Function => {
                let (name, body_start) = atom.function.expect("function atom carries metadata");
                let signature = src.text[atom.span.start..body_start.start].trim_end();
                ctx.functions.push(FunctionDef {
                    name,
                    qualified_signature: signature.to_string(),
                    body_text: src.text[atom.span.clone()].to_string(),
                    body_span: atom.span.clone(),
                    ordinal: ctx.functions.len() + 1,
                    enclosing: atom.enclosing,
                });
            }
            _ => ctx.globals.push(TopLevelItem {
                declares: atom.declares,
                ..item(atom.span.clone())
            }),
        }
        cursor = atom.span.end;
    }
    if cursor < bytes.len() {
        residue_start.get_or_insert(cursor);
    }
    if let Some(start) = residue_start {
        ctx.residue.push(item(start..bytes.len()));
    }

    let mut symbols: Vec<String> = ctx.globals.iter().flat_map(|g| g.declares.clone()).collect();
    symbols.extend(ctx.functions.iter().map(|f| f.name.clone()));
    let mut seen = std::collections::HashSet::new();
    symbols.retain(|s| seen.insert(s.clone()));
    ctx.global_symbols = symbols;
    Ok(ctx)
}

/// Parses in-memory text, e.g. a model response.
pub fn parse_text(text: &str, language: Language) -> Result<FileContext, ExtractError> {
    parse_file(&SourceFile::new("<memory>", language, text))
}

/// Reassembles the file from its extracted pieces.
pub fn reconstruct(ctx: &FileContext) -> String {
    let mut pieces: Vec<(usize, &str)> = ctx
        .headers
        .iter()
        .chain(&ctx.globals)
        .chain(&ctx.residue)
        .map(|i| (i.span.start, i.text.as_str()))
        .chain(
            ctx.functions
                .iter()
                .map(|f| (f.body_span.start, f.body_text.as_str())),
        )
        .collect();
    pieces.sort_by_key(|(start, _)| *start);
    pieces.into_iter().map(|(_, text)| text).collect()
}

/// Like [`reconstruct`], restoring any bytes that were not valid UTF-8.
pub fn reconstruct_bytes(ctx: &FileContext) -> Vec<u8> {
    restore_escapes(&reconstruct(ctx), ctx.file.escapes())
}

struct Walker<'a> {
    text: &'a str,
    atoms: Vec<Atom>,
}

const STRUCTURAL_FIELDS: &[&str] = &["name", "condition", "value", "parameters"];

impl<'a> Walker<'a> {
    fn container(&mut self, node: Node<'_>, enclosing: Option<Enclosing>) {
        for i in 0..node.child_count() {
            let Some(child) = node.child(i) else { continue };
            let field = node.field_name_for_child(i);
            if !child.is_named() || field.is_some_and(|f| STRUCTURAL_FIELDS.contains(&f)) {
                self.push(AtomKind::Structural, child, None);
            } else {
                self.named(child, enclosing);
            }
        }
    }

    fn named(&mut self, node: Node<'_>, enclosing: Option<Enclosing>) {
        match node.kind() {
            "comment" => self.push(AtomKind::Comment, node, None),
            "preproc_include" => self.push(AtomKind::Header, node, None),
            "function_definition" => self.function(node, node, enclosing),
            "template_declaration" => match named_child_of_kind(node, "function_definition") {
                Some(def) => self.function(node, def, enclosing),
                None => self.global(node),
            },
            "linkage_specification" => {
                if node
                    .child_by_field_name("body")
                    .is_some_and(|b| b.kind() == "declaration_list")
                {
                    self.container(node, Some(Enclosing::LinkageBlock));
                } else if let Some(def) = node
                    .child_by_field_name("body")
                    .filter(|b| b.kind() == "function_definition")
                {
                    self.function(node, def, Some(Enclosing::LinkageBlock));
                } else {
                    self.global(node);
                }
            }
            "namespace_definition" if node.child_by_field_name("name").is_none() => {
                self.container(node, Some(Enclosing::AnonymousNamespace));
            }
            "declaration_list" | "preproc_if" | "preproc_ifdef" | "preproc_else"
            | "preproc_elif" | "preproc_elifdef" => self.container(node, enclosing),
            _ => self.global(node),
        }
    }

    fn global(&mut self, node: Node<'_>) {
        let mut names = Vec::new();
        collect_declared_names(node, self.text, &mut names);
        self.push(AtomKind::Global, node, None);
        if let Some(atom) = self.atoms.last_mut().filter(|a| a.kind == AtomKind::Global) {
            atom.declares = names;
        }
    }

    fn function(&mut self, outer: Node<'_>, def: Node<'_>, enclosing: Option<Enclosing>) {
        let name = def
            .child_by_field_name("declarator")
            .and_then(|d| function_name(d, self.text));
        let body = def.child_by_field_name("body");
        match (name, body) {
            (Some(name), Some(body)) => {
                self.push(AtomKind::Function, outer, Some((name, body.byte_range())));
                if let Some(atom) = self.atoms.last_mut() {
                    atom.enclosing = enclosing;
                }
            }
            _ => self.global(outer),
        }
    }

    fn push(&mut self, kind: AtomKind, node: Node<'_>, function: Option<(String, Range<usize>)>) {
        let range = node.byte_range();
        let trimmed = self.text[range.clone()].trim_end().len();
        let span = range.start..range.start + trimmed;
        if span.is_empty() {
            return;
        }
        self.atoms.push(Atom {
            kind,
            span,
            enclosing: None,
            function,
            declares: Vec::new(),
        });
    }
}

/// Folds structural tokens (`#ifdef X`, `extern "C" {`, a stray `;`) into
/// global items.
fn coalesce(atoms: Vec<Atom>, bytes: &[u8]) -> Vec<Atom> {
    let gap_is_blank = |a: usize, b: usize| bytes[a..b].iter().all(u8::is_ascii_whitespace);
    let gap_is_inline = |a: usize, b: usize| bytes[a..b].iter().all(|c| *c == b' ' || *c == b'\t');
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for atom in atoms {
        if atom.kind == AtomKind::Structural {
            if let Some(prev) = out.last_mut() {
                let joins_structural = prev.kind == AtomKind::Structural
                    && gap_is_blank(prev.span.end, atom.span.start);
                let terminates_global = prev.kind == AtomKind::Global
                    && &bytes[atom.span.clone()] == b";"
                    && gap_is_inline(prev.span.end, atom.span.start);
                if joins_structural || terminates_global {
                    prev.span.end = atom.span.end;
                    continue;
                }
            }
        }
        out.push(atom);
    }
    for atom in &mut out {
        if atom.kind == AtomKind::Structural {
            atom.kind = AtomKind::Global;
        }
    }
    out
}

fn named_child_of_kind<'t>(node: Node<'t>, kind: &str) -> Option<Node<'t>> {
    let mut cursor = node.walk();
    let found = node.named_children(&mut cursor).find(|c| c.kind() == kind);
    found
}

fn function_name(declarator: Node<'_>, text: &str) -> Option<String> {
    match declarator.kind() {
        "function_declarator" => {
            let inner = declarator.child_by_field_name("declarator")?;
            match inner.kind() {
                "identifier" | "field_identifier" | "qualified_identifier" | "destructor_name"
                | "operator_name" | "template_function" | "operator_cast" => {
                    Some(text[inner.byte_range()].to_string())
                }
                // `int (*f(void))(int)` and friends: the name sits deeper.
                _ => function_name(inner, text).or_else(|| Some(text[inner.byte_range()].to_string())),
            }
        }
        _ => {
            let next = declarator
                .child_by_field_name("declarator")
                .or_else(|| {
                    let mut cursor = declarator.walk();
                    let last = declarator.named_children(&mut cursor).last();
                    last
                })?;
            function_name(next, text)
        }
    }
}

fn collect_declared_names(node: Node<'_>, text: &str, out: &mut Vec<String>) {
    match node.kind() {
        "declaration" | "type_definition" | "field_declaration" => {
            for i in 0..node.child_count() {
                let Some(child) = node.child(i) else { continue };
                match node.field_name_for_child(i) {
                    Some("declarator") => declarator_name(child, text, out),
                    Some("type") => collect_declared_names(child, text, out),
                    _ => {}
                }
            }
        }
        "struct_specifier" | "class_specifier" | "union_specifier" | "enum_specifier"
        | "preproc_def" | "preproc_function_def" | "namespace_definition" | "alias_declaration" => {
            if let Some(name) = node.child_by_field_name("name") {
                out.push(text[name.byte_range()].to_string());
            }
            if node.kind() == "enum_specifier" {
                if let Some(body) = node.child_by_field_name("body") {
                    let mut cursor = body.walk();
                    for e in body.named_children(&mut cursor) {
                        if let Some(name) = e.child_by_field_name("name") {
                            out.push(text[name.byte_range()].to_string());
                        }
                    }
                }
            }
        }
        _ => {}
    }
}

fn declarator_name(node: Node<'_>, text: &str, out: &mut Vec<String>) {
    match node.kind() {
        "identifier" | "type_identifier" | "field_identifier" | "qualified_identifier"
        | "primitive_type" => out.push(text[node.byte_range()].to_string()),
        _ => {
            if let Some(inner) = node.child_by_field_name("declarator") {
                declarator_name(inner, text, out);
            } else if let Some(first) = node.named_child(0) {
                declarator_name(first, text, out);
            }
        }
    }
}
