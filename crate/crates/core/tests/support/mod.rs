//! Shared helpers for integration tests (also pulled into the CLI tests via `#[path]`).
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use codemorph::gateway::Transcript;
use codemorph::{
    gen_prompt, merge, parse_file, parse_text, reconstruct, FileContext, Language, ProjectManifest,
    SourceFile, StrategyCatalog, TransformedFunction,
};
use proptest::prelude::*;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn toy_manifest() -> PathBuf {
    fixtures().join("toyproj/manifest.json")
}

pub fn blessing() -> bool {
    std::env::var_os("CODEMORPH_BLESS").is_some()
}

/// Writes one replay transcript per canned reply in
/// `replies/<strategy>/<function>.txt`, keyed by the prompt the pipeline
/// will send for that function. Returns the number written.
pub fn write_transcripts(manifest_path: &Path, replies: &Path, strategies: &[&str], out: &Path) -> usize {
    let manifest = ProjectManifest::load(manifest_path).unwrap();
    let catalog = StrategyCatalog::new();
    let mut written = 0;
    for token in strategies {
        let strategy = catalog.resolve(token).unwrap();
        for f in &manifest.files {
            let src = SourceFile::read(manifest.source_path(&f.path), f.language).unwrap();
            let ctx = parse_file(&src).unwrap();
            for func in &ctx.functions {
                let reply = replies.join(token).join(format!("{}.txt", func.name));
                let Ok(reply) = std::fs::read_to_string(&reply) else { continue };
                let bundle = gen_prompt(&strategy, &[func], &ctx, None).unwrap();
                Transcript {
                    fingerprint: bundle.fingerprint(),
                    responses: vec![reply],
                }
                .store(out)
                .unwrap();
                written += 1;
            }
        }
    }
    written
}

/// Texts of every top-level item of `ctx` except the functions with the
/// given ordinals, in document order. A merge may insert between items but
/// must keep each of these byte for byte.
pub fn kept_items<'a>(ctx: &'a FileContext, replaced: &[usize]) -> Vec<&'a str> {
    let mut spans: Vec<std::ops::Range<usize>> = ctx
        .headers
        .iter()
        .chain(&ctx.globals)
        .chain(&ctx.residue)
        .map(|i| i.span.clone())
        .chain(
            ctx.functions
                .iter()
                .filter(|f| !replaced.contains(&f.ordinal))
                .map(|f| f.body_span.clone()),
        )
        .collect();
    spans.sort_by_key(|s| s.start);
    spans
        .into_iter()
        .map(|s| &ctx.file.text[s])
        .filter(|t| !t.is_empty())
        .collect()
}

/// True when every segment occurs in `merged`, in order, without overlap.
pub fn segments_in_order(merged: &str, segments: &[&str]) -> bool {
    let mut cursor = 0;
    for seg in segments {
        match merged[cursor..].find(seg) {
            Some(i) => cursor += i + seg.len(),
            None => return false,
        }
    }
    true
}

/// A generated toy C file plus a generated replacement for one of its functions.
#[derive(Debug, Clone)]
pub struct MergeCase {
    pub source: String,
    pub target: usize,
    pub generated: String,
    pub helper: Option<String>,
    pub header: Option<String>,
}

const HEADERS: [&str; 4] = ["<stdio.h>", "<stdlib.h>", "<string.h>", "\"local.h\""];
const EXTRA_HEADERS: [&str; 3] = ["<limits.h>", "<ctype.h>", "<math.h>"];

fn body_expr() -> impl Strategy<Value = String> {
    prop_oneof![
        (0i32..100).prop_map(|n| format!("return x + {n};")),
        (1i32..9).prop_map(|n| format!("int y = x * {n};\n    return y;")),
        Just("if (x > 0)\n        return x;\n    return -x;".to_string()),
        Just("/* keep */\n    return g_count + x;".to_string()),
    ]
}

pub fn merge_case() -> impl Strategy<Value = MergeCase> {
    (
        proptest::sample::subsequence(HEADERS.to_vec(), 0..=3),
        0usize..3,
        prop::collection::vec(body_expr(), 1..6),
        any::<bool>(),
        prop::sample::select(vec!["\n", "\n\n", "\n/* sep */\n", "\r\n"]),
        any::<prop::sample::Index>(),
        body_expr(),
        any::<bool>(),
        prop::option::of(prop::sample::select(EXTRA_HEADERS.to_vec())),
    )
        .prop_map(
            |(headers, globals, bodies, trailing_nl, sep, idx, new_body, with_helper, header)| {
                let mut src = String::new();
                for h in &headers {
                    src.push_str(&format!("#include {h}\n"));
                }
                if !headers.is_empty() {
                    src.push('\n');
                }
                for g in 0..globals {
                    src.push_str(&format!("static int g_{g} = {g};\n"));
                }
                src.push_str("int g_count;\n\n");
                let n = bodies.len();
                for (i, b) in bodies.iter().enumerate() {
                    src.push_str(&format!("int fn_{i}(int x)\n{{\n    {b}\n}}"));
                    if i + 1 < n {
                        src.push_str(sep);
                    }
                }
                if trailing_nl {
                    src.push('\n');
                }
                let target = idx.index(n);
                let helper = with_helper.then(|| format!("helper_{target}"));
                let call = match &helper {
                    Some(h) => format!("    x = {h}(x);\n"),
                    None => String::new(),
                };
                let mut generated = String::new();
                if let Some(h) = header {
                    generated.push_str(&format!("#include {h}\n\n"));
                }
                if let Some(h) = &helper {
                    generated.push_str(&format!("static int {h}(int v)\n{{\n    return v - 1;\n}}\n\n"));
                }
                generated.push_str(&format!("int fn_{target}(int x)\n{{\n{call}    {new_body}\n}}\n"));
                MergeCase {
                    source: src,
                    target,
                    generated,
                    helper,
                    header: header.map(str::to_string),
                }
            },
        )
}

pub fn parses_cleanly(text: &str) -> bool {
    let mut parser = tree_sitter::Parser::new();
    parser.set_language(&tree_sitter_c::LANGUAGE.into()).unwrap();
    !parser.parse(text, None).unwrap().root_node().has_error()
}

/// Untouched items, re-parseability and idempotence for one generated case.
pub fn check_merge_case(case: &MergeCase) -> Result<(), TestCaseError> {
    let ctx = parse_text(&case.source, Language::C).unwrap();
    let original = &ctx.functions[case.target];
    let tf = TransformedFunction::from_generated(&ctx, original, &case.generated).unwrap();
    let merged = merge(&ctx, std::slice::from_ref(&tf)).unwrap();

    // untouched bytes: every item but the target definition survives, in order
    let kept = kept_items(&ctx, &[original.ordinal]);
    prop_assert!(segments_in_order(&merged.text, &kept));
    prop_assert_eq!(merged.modified_ordinals.iter().copied().collect::<Vec<_>>(), vec![case.target + 1]);

    // re-parseable, with the target and helper defined once each
    prop_assert!(parses_cleanly(&merged.text), "merged text does not parse:\n{}", merged.text);
    let reparsed = parse_text(&merged.text, Language::C).unwrap();
    prop_assert_eq!(reconstruct(&reparsed), merged.text.clone());
    let extra = usize::from(case.helper.is_some());
    prop_assert_eq!(reparsed.functions.len(), ctx.functions.len() + extra);
    let name = &original.name;
    prop_assert_eq!(reparsed.functions.iter().filter(|f| &f.name == name).count(), 1);
    if let Some(h) = &case.header {
        prop_assert_eq!(merged.text.matches(&format!("#include {h}")).count(), 1);
    }

    // idempotence: the same transformation twice, or again on the merged output
    let twice = merge(&ctx, &[tf.clone(), tf.clone()]).unwrap();
    prop_assert_eq!(&twice.text, &merged.text);
    let target = reparsed.function(name).unwrap();
    let again = TransformedFunction::from_generated(&reparsed, target, &case.generated).unwrap();
    let remerged = merge(&reparsed, &[again]).unwrap();
    prop_assert_eq!(&remerged.text, &merged.text);
    Ok(())
}

/// Longest common subsequence by trying every subsequence of the shorter side.
pub fn brute_lcs<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let picked = short.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| x);
        if is_subsequence(picked, long) {
            best = size;
        }
    }
    best
}

pub fn is_subsequence<'a, T: PartialEq + 'a>(needle: impl IntoIterator<Item = &'a T>, hay: &[T]) -> bool {
    let mut it = hay.iter();
    needle.into_iter().all(|x| it.any(|y| y == x))
}

/// Every sequence over {0,1,2} of length 0..=max.
pub fn all_sequences(max: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for s in &frontier {
            for sym in 0..3u8 {
                let mut t = s.clone();
                t.push(sym);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub const SENTINELS: [&str; 5] = [
    "Below this prompt you are provided headers, global variables",
    // strategy fragment sits here; checked per case
    "REMEMBER, the generated code MUST MAINTAIN the same FUNCTIONALITY",
    "These CRUCIAL instructions below MUST ALWAYS BE FOLLOWED",
    "8. DO NOT change the function name",
    "Here is the code : \n",
];

pub struct PromptCase {
    pub source: &'static str,
    pub language: Language,
    pub strategy: &'static str,
    pub target: &'static str,
    pub golden: &'static str,
    pub fragment_head: &'static str,
}

pub const PROMPT_CASES: [PromptCase; 3] = [
    PromptCase {
        source: "toyproj/src/main.c",
        language: Language::C,
        strategy: "optimization",
        target: "print_stats",
        golden: "toy_main_print_stats_optimization.txt",
        fragment_head: "1. Remove code redundancies.",
    },
    PromptCase {
        source: "toyproj/src/mathutil.c",
        language: Language::C,
        strategy: "reusability",
        target: "gcd",
        golden: "toy_mathutil_gcd_reusability.txt",
        fragment_head: "Make the code reusable by dividing",
    },
    PromptCase {
        source: "antisandbox/main.cpp",
        language: Language::Cpp,
        strategy: "optimization",
        target: "AntiSandbox",
        golden: "antisandbox_optimization.txt",
        fragment_head: "1. Remove code redundancies.",
    },
];

pub fn golden_dir() -> PathBuf {
    fixtures().join("goldens")
}

/// Returns `(rendered prompt, user text)` for a case.
pub fn render_prompt(case: &PromptCase) -> (String, String) {
    let src = SourceFile::read(fixtures().join(case.source), case.language).unwrap();
    let ctx = parse_file(&src).unwrap();
    let strategy = StrategyCatalog::new().resolve(case.strategy).unwrap();
    let target = ctx.function(case.target).unwrap();
    let bundle = gen_prompt(&strategy, &[target], &ctx, None).unwrap();
    (bundle.render(), bundle.user_text)
}

/// Copies the toy project's sources and scripts to `<dest>/proj`, returning
/// the copied manifest path.
pub fn copy_toy_project(dest: &Path) -> PathBuf {
    let src = fixtures().join("toyproj");
    for rel in ["src/main.c", "src/mathutil.c", "src/mathutil.h", "build.sh", "check.sh", "manifest.json"] {
        let to = dest.join("proj").join(rel);
        std::fs::create_dir_all(to.parent().unwrap()).unwrap();
        std::fs::copy(src.join(rel), to).unwrap();
    }
    dest.join("proj/manifest.json")
}
