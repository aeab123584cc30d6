use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::manifest::ProjectManifest;
use crate::extractor::{FileContext, Language};

/// How many of a file's `total` functions get modified.
pub fn select_functions(total: usize) -> usize {
    // percent as an integer so 46 * 20 / 100 is exact before rounding up
    let pct = match total {
        0..=9 => 100,
        10..=20 => 60,
        21..=40 => 30,
        41..=70 => 20,
        _ => 15,
    };
    (total * pct).div_ceil(100)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlanDerivation {
    AscendingFunctionCount,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlannedFile {
    pub path: PathBuf,
    pub language: Language,
    pub function_count: usize,
    /// Always `1..=j`.
    pub ordinals: Vec<usize>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModificationPlan {
    pub files: Vec<PlannedFile>,
    pub derivation: PlanDerivation,
}

impl ModificationPlan {
    pub fn file(&self, path: &std::path::Path) -> Option<&PlannedFile> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn total_steps(&self) -> usize {
        self.files.iter().map(|f| f.ordinals.len()).sum()
    }
}

/// Orders the manifest's non-excluded files by ascending function count and
/// picks a modification prefix for each.
///
/// `contexts[i]` must be the parse of `manifest.files[i]`. Ties keep manifest
/// order unless `tie_seed` asks for a seeded shuffle within each tie group.
pub fn plan(
    manifest: &ProjectManifest,
    contexts: &[FileContext],
    tie_seed: Option<u64>,
) -> ModificationPlan {
    let override_counts = manifest.selection_override.as_ref();
    let mut files: Vec<PlannedFile> = manifest
        .files
        .iter()
        .zip(contexts)
        .filter(|(f, _)| !manifest.is_excluded(&f.path))
        .map(|(f, ctx)| {
            let total = ctx.functions.len();
            let j = override_counts
                .and_then(|o| o.get(&f.path))
                .map_or_else(|| select_functions(total), |&n| n.min(total));
            PlannedFile {
                path: f.path.clone(),
                language: f.language,
                function_count: total,
                ordinals: (1..=j).collect(),
                names: ctx.functions[..j].iter().map(|f| f.name.clone()).collect(),
            }
        })
        .collect();

    if let Some(seed) = tie_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        files.shuffle(&mut rng);
    }
    files.sort_by_key(|f| f.function_count);

    let derivation = if override_counts.is_some_and(|o| !o.is_empty()) {
        PlanDerivation::Manual
    } else {
        PlanDerivation::AscendingFunctionCount
    };
    ModificationPlan { files, derivation }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::extractor::parse_text;
    use crate::orchestrator::manifest::ManifestFile;

    #[test]
    fn bracket_table() {
        let cases = [
            (0, 0), (1, 1), (4, 4), (9, 9), (10, 6), (15, 9), (20, 12), (21, 7),
            (40, 12), (41, 9), (46, 10), (61, 13), (70, 14), (71, 11), (100, 15),
        ];
        for (total, want) in cases {
            assert_eq!(select_functions(total), want, "total {total}");
        }
    }

    fn with_functions(n: usize) -> FileContext {
        let text: String = (0..n).map(|i| format!("int f{i}(void){{return {i};}}\n")).collect();
        parse_text(&text, Language::C).unwrap()
    }

    fn manifest(names: &[&str]) -> ProjectManifest {
        ProjectManifest {
            root: ".".into(),
            files: names
                .iter()
                .map(|n| ManifestFile {
                    path: n.into(),
                    language: Language::C,
                })
                .collect(),
            build_command: vec!["make".into()],
            build_ok_pattern: None,
            variant_output_glob: "app".into(),
            strategies: Vec::new(),
            exclude: Vec::new(),
            selection_override: None,
        }
    }

    fn order(p: &ModificationPlan) -> Vec<String> {
        p.files.iter().map(|f| f.path.display().to_string()).collect()
    }

    #[test]
    fn ascending_stable_order() {
        let m = manifest(&["a.c", "b.c", "c.c"]);
        let ctxs = [with_functions(5), with_functions(2), with_functions(9)];
        let p = plan(&m, &ctxs, None);
        assert_eq!(order(&p), ["b.c", "a.c", "c.c"]);
        assert_eq!(p.derivation, PlanDerivation::AscendingFunctionCount);
        assert_eq!(p.files[0].ordinals, [1, 2]);
        assert_eq!(p.files[0].names, ["f0", "f1"]);

        let m = manifest(&["x.c", "y.c"]);
        let ctxs = [with_functions(3), with_functions(3)];
        assert_eq!(order(&plan(&m, &ctxs, None)), ["x.c", "y.c"]);
    }

    #[test]
    fn seeded_ties_are_reproducible() {
        let names: Vec<String> = (0..8).map(|i| format!("f{i}.c")).collect();
        let m = manifest(&names.iter().map(String::as_str).collect::<Vec<_>>());
        let ctxs: Vec<_> = (0..8).map(|i| with_functions(if i < 4 { 2 } else { 1 })).collect();
        let a = plan(&m, &ctxs, Some(7));
        assert_eq!(a, plan(&m, &ctxs, Some(7)));
        assert!(a.files.windows(2).all(|w| w[0].function_count <= w[1].function_count));
    }

    #[test]
    fn override_and_exclude() {
        let mut m = manifest(&["a.c", "vendor/z.c"]);
        m.exclude = vec!["vendor/*".into()];
        m.selection_override = Some(BTreeMap::from([(PathBuf::from("a.c"), 2)]));
        let p = plan(&m, &[with_functions(9), with_functions(1)], None);
        assert_eq!(order(&p), ["a.c"]);
        assert_eq!(p.files[0].ordinals, [1, 2]);
        assert_eq!(p.derivation, PlanDerivation::Manual);

        m.selection_override = Some(BTreeMap::from([(PathBuf::from("a.c"), 50)]));
        assert_eq!(plan(&m, &[with_functions(3), with_functions(1)], None).files[0].ordinals, [1, 2, 3]);
    }
}
