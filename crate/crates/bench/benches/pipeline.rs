use criterion::{black_box, criterion_group, criterion_main, Criterion};

use titleqa::pipeline::answer_question;
use titleqa::search::{search_qlm, search_vsm, Field};
use titleqa::{analyze, InvertedIndex, Model, PipelineConfig, Query, Resources};
use titleqa_bench::{corpus, index, questions};

fn bench_analysis(c: &mut Criterion) {
    let store = corpus();
    let body = &store.documents()[0].body;
    c.bench_function("analyze_document", |b| b.iter(|| analyze(black_box(body))));
}

fn bench_index(c: &mut Criterion) {
    let store = corpus();
    c.bench_function("build_index", |b| {
        b.iter(|| InvertedIndex::build(black_box(&store)).unwrap())
    });
}

fn bench_search(c: &mut Criterion) {
    let idx = index();
    let terms = analyze("Which painter painted the amber orchard near the river?");
    let q = Query::from_terms(
        terms.tokens(),
        &[(Field::Content, 1.0), (Field::Title, 0.3)],
    )
    .unwrap();
    c.bench_function("search_vsm", |b| {
        b.iter(|| search_vsm(&idx, black_box(&q), 20))
    });
    c.bench_function("search_qlm", |b| {
        b.iter(|| search_qlm(&idx, black_box(&q), 20, 2000.0))
    });
}

fn bench_answer(c: &mut Criterion) {
    let idx = index();
    let qs = questions();
    let cfg = PipelineConfig::default();
    let res = Resources {
        index: &idx,
        webmock: None,
    };
    c.bench_function("answer_question", |b| {
        b.iter(|| answer_question(black_box(&qs[0]), &res, &Model::Uniform, &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    bench_analysis,
    bench_index,
    bench_search,
    bench_answer
);
criterion_main!(benches);
