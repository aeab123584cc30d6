use std::path::PathBuf;

use codemorph::metrics::lcs_length;
use codemorph::{merge, parse_file, parse_text, Language, SourceFile, TransformedFunction};
use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn corpus() -> Vec<SourceFile> {
    let mut paths: Vec<_> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let lang = Language::from_extension(&p).unwrap();
            SourceFile::read(&p, lang).unwrap()
        })
        .collect()
}

fn bench_parse(c: &mut Criterion) {
    let files = corpus();
    c.bench_function("parse_corpus", |b| {
        b.iter(|| {
            for f in &files {
                black_box(parse_file(f).unwrap());
            }
        })
    });
}

fn bench_lcs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lcs_length");
    for n in [100usize, 1000] {
        let a: Vec<u32> = (0..n as u32).map(|i| i.wrapping_mul(2654435761) % 17).collect();
        let b: Vec<u32> = (0..n as u32).map(|i| i.wrapping_mul(40503) % 17).collect();
        group.bench_function(n.to_string(), |bench| bench.iter(|| lcs_length(black_box(&a), black_box(&b))));
    }
    group.finish();
}

fn bench_merge(c: &mut Criterion) {
    let text: String = (0..200).map(|i| format!("int f{i}(int x) {{ return x + {i}; }}\n")).collect();
    let ctx = parse_text(&text, Language::C).unwrap();
    let target = &ctx.functions[100];
    let replacement = "int f100(int x) {\n    int y = x;\n    return y + 100;\n}";
    c.bench_function("merge_one_of_200", |b| {
        b.iter_batched(
            || TransformedFunction::from_generated(&ctx, target, replacement).unwrap(),
            |tf| merge(&ctx, &[tf]).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_parse, bench_lcs, bench_merge);
criterion_main!(benches);
