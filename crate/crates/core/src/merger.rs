//! Splices generated function definitions back into their source file.
//!
//! Only the target definitions' byte ranges are replaced. New include lines go
//! right after the last existing include, helper prototypes (and any new
//! file-scope declarations) after the globals that precede the first
//! function, and helper definitions just before the first function. Every
//! other byte is copied through unchanged.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::Serialize;

use crate::error::MergeError;
use crate::extractor::{parse_text, restore_escapes, FileContext, FunctionDef};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HelperFunction {
    pub name: String,
    pub prototype: String,
    pub definition_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformedFunction {
    pub original: FunctionDef,
    pub replacement_text: String,
    pub new_headers: Vec<String>,
    pub helper_functions: Vec<HelperFunction>,
    /// File-scope declarations the generated code needs that the file lacks.
    pub new_globals: Vec<String>,
}

impl TransformedFunction {
    /// A target that keeps its original definition (e.g. after a reverted generation).
    pub fn unchanged(original: &FunctionDef) -> Self {
        Self {
            original: original.clone(),
            replacement_text: original.body_text.clone(),
            new_headers: Vec::new(),
            helper_functions: Vec::new(),
            new_globals: Vec::new(),
        }
    }

    /// Splits generated code into the target definition, new includes,
    /// helper functions and new declarations, checking it against `ctx`.
    pub fn from_generated(
        ctx: &FileContext,
        original: &FunctionDef,
        code_text: &str,
    ) -> Result<Self, MergeError> {
        if code_text.trim() == original.body_text.trim() {
            return Ok(Self::unchanged(original));
        }
        let (stripped, mut new_headers) = extract_new_headers(code_text, ctx.header_lines());
        let parsed = parse_text(&stripped, ctx.file.language).map_err(|_| {
            MergeError::NameMismatch {
                expected: original.name.clone(),
                found: Vec::new(),
            }
        })?;

        for header in &parsed.headers {
            let key = include_key(&header.text);
            let known = ctx
                .header_lines()
                .chain(new_headers.iter().map(String::as_str))
                .any(|h| include_key(h) == key);
            if !known {
                new_headers.push(header.text.trim().to_string());
            }
        }

        let target = parsed
            .functions
            .iter()
            .find(|f| f.name == original.name)
            .ok_or_else(|| MergeError::NameMismatch {
                expected: original.name.clone(),
                found: parsed.functions.iter().map(|f| f.name.clone()).collect(),
            })?;

        let collision = |symbol: &str| MergeError::HelperCollision {
            target: original.name.clone(),
            symbol: symbol.to_string(),
        };

        let mut helper_functions: Vec<HelperFunction> = Vec::new();
        for f in parsed.functions.iter().filter(|f| f.ordinal != target.ordinal) {
            if f.name == original.name || helper_functions.iter().any(|h| h.name == f.name) {
                return Err(collision(&f.name));
            }
            if let Some(existing) = ctx.function(&f.name) {
                if normalize(&existing.body_text) == normalize(&f.body_text) {
                    continue;
                }
                return Err(collision(&f.name));
            }
            if ctx.global_symbols.contains(&f.name) {
                return Err(collision(&f.name));
            }
            helper_functions.push(HelperFunction {
                name: f.name.clone(),
                prototype: f.prototype(),
                definition_text: f.body_text.clone(),
            });
        }

        let own_names: Vec<&str> = std::iter::once(original.name.as_str())
            .chain(helper_functions.iter().map(|h| h.name.as_str()))
            .collect();
        let existing_globals: Vec<String> = ctx.globals.iter().map(|g| normalize(&g.text)).collect();
        let mut new_globals = Vec::new();
        for global in &parsed.globals {
            if existing_globals.contains(&normalize(&global.text)) {
                continue;
            }
            let is_own_prototype = !global.declares.is_empty()
                && global.declares.iter().all(|d| own_names.contains(&d.as_str()))
                && global.text.contains('(');
            if is_own_prototype {
                continue;
            }
            if let Some(symbol) = global
                .declares
                .iter()
                .find(|d| ctx.global_symbols.contains(d))
            {
                return Err(collision(symbol));
            }
            new_globals.push(global.text.clone());
        }

        Ok(Self {
            original: original.clone(),
            replacement_text: target.body_text.clone(),
            new_headers,
            helper_functions,
            new_globals,
        })
    }

    pub fn is_unchanged(&self) -> bool {
        self.replacement_text == self.original.body_text
            && self.new_headers.is_empty()
            && self.helper_functions.is_empty()
            && self.new_globals.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Transformed,
    Original,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedFile {
    pub text: String,
    pub modified_ordinals: BTreeSet<usize>,
    pub provenance: BTreeMap<usize, Provenance>,
    /// Byte ranges in `text` holding helper definitions and the replaced targets.
    pub transformed_regions: Vec<Range<usize>>,
    escapes: Vec<(usize, u8)>,
}

impl MergedFile {
    /// The merged text with any non-UTF-8 bytes of the source restored.
    pub fn to_bytes(&self) -> Vec<u8> {
        restore_escapes(&self.text, &self.escapes)
    }
}

/// Removes include lines (and blank lines) from the top of `replacement_text`
/// and returns the remaining code plus the includes that `existing` lacks.
///
/// Includes compare equal when their paths match, ignoring whitespace and
/// whether the path is written in `<>` or `""`.
pub fn extract_new_headers<'a, I>(replacement_text: &str, existing: I) -> (String, Vec<String>)
where
    I: IntoIterator<Item = &'a str>,
{
    let existing: Vec<String> = existing.into_iter().map(include_key).collect();
    let mut new_headers: Vec<String> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    let mut consumed = 0;
    for line in replacement_text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            consumed += line.len();
            continue;
        }
        if !is_include(trimmed) {
            break;
        }
        consumed += line.len();
        let key = include_key(trimmed);
        if !existing.contains(&key) && !seen.contains(&key) {
            seen.push(key);
            new_headers.push(trimmed.to_string());
        }
    }
    (replacement_text[consumed..].to_string(), new_headers)
}

fn is_include(line: &str) -> bool {
    line.strip_prefix('#')
        .map(|rest| rest.trim_start().starts_with("include"))
        .unwrap_or(false)
}

fn include_key(line: &str) -> String {
    let line = line.trim();
    let rest = line
        .strip_prefix('#')
        .map(str::trim_start)
        .and_then(|r| r.strip_prefix("include"))
        .unwrap_or(line);
    let rest = rest.split("//").next().unwrap_or(rest);
    rest.chars()
        .filter(|c| !c.is_whitespace() && !matches!(c, '<' | '>' | '"'))
        .collect()
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug)]
enum Edit {
    Insert(String),
    Replace(Range<usize>, String),
}

/// Applies `transformed` (functions 1..t of a plan) to the file in `ctx`.
///
/// A later entry for the same function supersedes an earlier one.
pub fn merge(ctx: &FileContext, transformed: &[TransformedFunction]) -> Result<MergedFile, MergeError> {
    let text = &ctx.file.text;

    let mut by_ordinal: BTreeMap<usize, &TransformedFunction> = BTreeMap::new();
    for t in transformed {
        let current = locate(ctx, &t.original)?;
        if t.replacement_text != t.original.body_text {
            check_defines(t, ctx)?;
        }
        by_ordinal.insert(current.ordinal, t);
    }

    let existing_headers: Vec<String> = ctx.header_lines().map(include_key).collect();
    let mut headers: Vec<&str> = Vec::new();
    let mut header_keys: Vec<String> = Vec::new();
    let mut helpers: Vec<&HelperFunction> = Vec::new();
    let mut globals: Vec<&str> = Vec::new();
    let target_names: Vec<&str> = by_ordinal.values().map(|t| t.original.name.as_str()).collect();

    for t in by_ordinal.values() {
        for h in &t.new_headers {
            let key = include_key(h);
            if !existing_headers.contains(&key) && !header_keys.contains(&key) {
                header_keys.push(key);
                headers.push(h);
            }
        }
        for helper in &t.helper_functions {
            if target_names.contains(&helper.name.as_str()) {
                return Err(MergeError::HelperCollision {
                    target: t.original.name.clone(),
                    symbol: helper.name.clone(),
                });
            }
            if let Some(existing) = ctx.function(&helper.name) {
                if normalize(&existing.body_text) == normalize(&helper.definition_text) {
                    continue;
                }
                return Err(MergeError::HelperCollision {
                    target: t.original.name.clone(),
                    symbol: helper.name.clone(),
                });
            }
            match helpers.iter().find(|h| h.name == helper.name) {
                Some(prev) if normalize(&prev.definition_text) != normalize(&helper.definition_text) => {
                    return Err(MergeError::HelperCollision {
                        target: t.original.name.clone(),
                        symbol: helper.name.clone(),
                    });
                }
                Some(_) => {}
                None => helpers.push(helper),
            }
        }
        for g in &t.new_globals {
            if !globals.iter().any(|x| normalize(x) == normalize(g)) {
                globals.push(g);
            }
        }
    }

    let existing_globals: Vec<String> = ctx.globals.iter().map(|g| normalize(&g.text)).collect();
    let mut declarations: Vec<String> = Vec::new();
    for g in globals {
        if !existing_globals.contains(&normalize(g)) {
            declarations.push(g.to_string());
        }
    }
    for h in &helpers {
        if !existing_globals.contains(&normalize(&h.prototype)) {
            declarations.push(h.prototype.clone());
        }
    }

    let first_fn = ctx.functions.first().map(|f| f.body_span.start).unwrap_or(text.len());
    let last_header_end = ctx
        .headers
        .iter()
        .map(|h| h.span.end)
        .filter(|end| *end <= first_fn)
        .max();
    let last_global_end = ctx
        .globals
        .iter()
        .map(|g| g.span.end)
        .filter(|end| *end <= first_fn)
        .max();

    let mut edits: Vec<(usize, u8, Edit)> = Vec::new();
    if !headers.is_empty() {
        let block = headers.join("\n");
        match ctx.headers.iter().map(|h| h.span.end).max() {
            Some(end) => edits.push((end, 0, Edit::Insert(format!("\n{block}")))),
            None => edits.push((0, 0, Edit::Insert(format!("{block}\n")))),
        }
    }
    if !declarations.is_empty() {
        let block = declarations.join("\n");
        match last_global_end.or(last_header_end) {
            Some(end) => edits.push((end, 1, Edit::Insert(format!("\n\n{block}")))),
            None => edits.push((first_fn, 1, Edit::Insert(format!("{block}\n\n")))),
        }
    }
    if !helpers.is_empty() {
        let block = helpers
            .iter()
            .map(|h| h.definition_text.as_str())
            .collect::<Vec<_>>()
            .join("\n\n");
        edits.push((first_fn, 2, Edit::Insert(format!("{block}\n\n"))));
    }
    for (ordinal, t) in &by_ordinal {
        let span = ctx.functions[ordinal - 1].body_span.clone();
        edits.push((span.start, 3, Edit::Replace(span, t.replacement_text.clone())));
    }
    edits.sort_by_key(|(pos, seq, _)| (*pos, *seq));

    let mut out = String::with_capacity(text.len() + 256);
    let mut escapes = Vec::new();
    let mut regions = Vec::new();
    let mut cursor = 0;
    let copy = |out: &mut String, escapes: &mut Vec<(usize, u8)>, range: Range<usize>| {
        let base = out.len();
        escapes.extend(
            ctx.file
                .escapes()
                .iter()
                .filter(|(off, _)| range.contains(off))
                .map(|(off, b)| (base + off - range.start, *b)),
        );
        out.push_str(&text[range]);
    };
    for (pos, seq, edit) in edits {
        if pos > cursor {
            copy(&mut out, &mut escapes, cursor..pos);
            cursor = pos;
        }
        match edit {
            Edit::Insert(block) => {
                let start = out.len();
                out.push_str(&block);
                if seq == 2 {
                    regions.push(start..start + block.trim_end().len());
                }
            }
            Edit::Replace(span, replacement) => {
                let start = out.len();
                out.push_str(&replacement);
                regions.push(start..out.len());
                cursor = span.end;
            }
        }
    }
    copy(&mut out, &mut escapes, cursor..text.len());

    let provenance = ctx
        .functions
        .iter()
        .map(|f| {
            let p = if by_ordinal.contains_key(&f.ordinal) {
                Provenance::Transformed
            } else {
                Provenance::Original
            };
            (f.ordinal, p)
        })
        .collect();

    Ok(MergedFile {
        text: out,
        modified_ordinals: by_ordinal.keys().copied().collect(),
        provenance,
        transformed_regions: regions,
        escapes,
    })
}

fn locate<'c>(ctx: &'c FileContext, original: &FunctionDef) -> Result<&'c FunctionDef, MergeError> {
    if let Some(f) = ctx
        .functions
        .iter()
        .find(|f| f.body_span == original.body_span && f.body_text == original.body_text)
    {
        return Ok(f);
    }
    let mut named = ctx.functions.iter().filter(|f| f.name == original.name);
    match (named.next(), named.next()) {
        (Some(f), None) => Ok(f),
        _ => Err(MergeError::TargetNotFound(original.name.clone())),
    }
}

fn check_defines(t: &TransformedFunction, ctx: &FileContext) -> Result<(), MergeError> {
    let parsed = parse_text(&t.replacement_text, ctx.file.language).ok();
    let found: Vec<String> = parsed
        .map(|p| p.functions.into_iter().map(|f| f.name).collect())
        .unwrap_or_default();
    if found.len() == 1 && found[0] == t.original.name {
        Ok(())
    } else {
        Err(MergeError::NameMismatch {
            expected: t.original.name.clone(),
            found,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::{parse_file, Language, SourceFile};

    fn ctx(text: &str) -> FileContext {
        parse_file(&SourceFile::new("t.c", Language::C, text)).unwrap()
    }

    const FILE: &str = "#include <stdio.h>\n#include \"x.h\"\n\nint g = 1;\n\nint f(int a) {\n    return a + g;\n}\n\nint h(void) {\n    return 2;\n}\n";

    #[test]
    fn empty_merge_is_identity() {
        let c = ctx(FILE);
        let m = merge(&c, &[]).unwrap();
        assert_eq!(m.text, FILE);
        assert!(m.modified_ordinals.is_empty());
        assert!(m.provenance.values().all(|p| *p == Provenance::Original));
    }

    #[test]
    fn header_extraction() {
        let existing = ["#include <stdio.h>", "#include \"x.h\""];
        let (rest, new) = extract_new_headers("#include <cctype>\nint f(){}", existing);
        assert_eq!(new, ["#include <cctype>"]);
        assert_eq!(rest, "int f(){}");
        let (_, new) = extract_new_headers("#include <stdio.h>\nint f(){}", existing);
        assert!(new.is_empty());
        for variant in ["#include\"x.h\"", "#include  <x.h>", "# include \"x.h\"", "#include \"x.h\" // ok"] {
            let (_, new) = extract_new_headers(&format!("{variant}\nint f(){{}}"), existing);
            assert!(new.is_empty(), "{variant}");
        }
        let (_, new) = extract_new_headers("#include <a.h>\n\n#include<a.h>\nint f(){}", existing);
        assert_eq!(new, ["#include <a.h>"]);
    }

    #[test]
    fn replaces_target_and_adds_header() {
        let c = ctx(FILE);
        let t = TransformedFunction::from_generated(
            &c,
            &c.functions[0],
            "#include <stdlib.h>\n#include <stdio.h>\nint f(int a) {\n    return g + a;\n}",
        )
        .unwrap();
        assert_eq!(t.new_headers, ["#include <stdlib.h>"]);
        let m = merge(&c, &[t]).unwrap();
        assert_eq!(
            m.text,
            "#include <stdio.h>\n#include \"x.h\"\n#include <stdlib.h>\n\nint g = 1;\n\nint f(int a) {\n    return g + a;\n}\n\nint h(void) {\n    return 2;\n}\n"
        );
        assert_eq!(m.modified_ordinals, BTreeSet::from([1]));
        assert_eq!(m.provenance[&2], Provenance::Original);
    }

    #[test]
    fn helpers_are_hoisted() {
        let c = ctx(FILE);
        let code = "static int twice(int x);\nstatic int twice(int x) { return 2 * x; }\nint f(int a) {\n    return twice(a) - a + g;\n}\n";
        let t = TransformedFunction::from_generated(&c, &c.functions[0], code).unwrap();
        assert_eq!(t.helper_functions.len(), 1);
        assert_eq!(t.helper_functions[0].prototype, "static int twice(int x);");
        assert!(t.new_globals.is_empty());
        let m = merge(&c, &[t]).unwrap();
        let re = ctx(&m.text);
        let names: Vec<_> = re.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["twice", "f", "h"]);
        assert!(m.text.contains("int g = 1;\n\nstatic int twice(int x);\n\nstatic int twice"));
        assert_eq!(m.transformed_regions.len(), 2);
        assert_eq!(&m.text[m.transformed_regions[0].clone()], "static int twice(int x) { return 2 * x; }");
    }

    #[test]
    fn name_mismatch_and_collisions() {
        let c = ctx(FILE);
        let err = TransformedFunction::from_generated(&c, &c.functions[0], "int q(int a) { return a; }");
        assert!(matches!(err, Err(MergeError::NameMismatch { .. })));

        let err = TransformedFunction::from_generated(
            &c,
            &c.functions[0],
            "int g = 5;\nint f(int a) { return a; }",
        );
        assert_eq!(
            err,
            Err(MergeError::HelperCollision { target: "f".into(), symbol: "g".into() })
        );

        let ok = TransformedFunction::from_generated(
            &c,
            &c.functions[0],
            "int g = 1;\nint f(int a) { return a; }",
        )
        .unwrap();
        assert!(ok.new_globals.is_empty());

        let err = TransformedFunction::from_generated(
            &c,
            &c.functions[0],
            "int h(void) { return 3; }\nint f(int a) { return h() + a; }",
        );
        assert!(matches!(err, Err(MergeError::HelperCollision { .. })));

        let mut bogus = TransformedFunction::unchanged(&c.functions[0]);
        bogus.replacement_text = "int zz(int a) { return a; }".into();
        assert!(matches!(merge(&c, &[bogus]), Err(MergeError::NameMismatch { .. })));

        let other = ctx("int nope(void) { return 0; }");
        let missing = TransformedFunction::unchanged(&other.functions[0]);
        assert_eq!(merge(&c, &[missing]), Err(MergeError::TargetNotFound("nope".into())));
    }

    #[test]
    fn no_headers_no_globals() {
        let c = ctx("int f(void) { return 1; }\n");
        let t = TransformedFunction::from_generated(
            &c,
            &c.functions[0],
            "#include <stdlib.h>\nstatic int one(void) { return 1; }\nint f(void) { return one(); }",
        )
        .unwrap();
        let m = merge(&c, &[t]).unwrap();
        assert_eq!(
            m.text,
            "#include <stdlib.h>\nstatic int one(void);\n\nstatic int one(void) { return 1; }\n\nint f(void) { return one(); }\n"
        );
    }

    #[test]
    fn duplicate_entries_and_remerge_are_idempotent() {
        let c = ctx(FILE);
        let code = "#include <stdlib.h>\nstatic int twice(int x) { return 2 * x; }\nint f(int a) { return twice(a) - a + g; }";
        let t = TransformedFunction::from_generated(&c, &c.functions[0], code).unwrap();
        let once = merge(&c, std::slice::from_ref(&t)).unwrap();
        let twice = merge(&c, &[t.clone(), t]).unwrap();
        assert_eq!(once.text, twice.text);

        let re = ctx(&once.text);
        let target = re.function("f").unwrap();
        let again = TransformedFunction::from_generated(&re, target, code).unwrap();
        assert_eq!(merge(&re, &[again]).unwrap().text, once.text);
    }

    #[test]
    fn escapes_survive_merge() {
        let bytes = b"/* \xe9 */\nint f(void) { return 1; }\n/* \xff */\nint h(void) { return 2; }\n";
        let src = SourceFile::from_bytes("t.c", Language::C, bytes);
        let c = parse_file(&src).unwrap();
        let t = TransformedFunction::from_generated(&c, &c.functions[0], "int f(void) { return 1 + 0; }").unwrap();
        let m = merge(&c, &[t]).unwrap();
        assert_eq!(
            m.to_bytes(),
            b"/* \xe9 */\nint f(void) { return 1 + 0; }\n/* \xff */\nint h(void) { return 2; }\n"
        );
    }
}
