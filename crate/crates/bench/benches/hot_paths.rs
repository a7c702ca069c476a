use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use spanmark_bench::{large_vocab, message, spans, word_spans};
use spanmark_core::metrics::optimal_assignment;
use spanmark_core::{parse, render, ConstraintEngine, MarkerConfig};

fn constraint(c: &mut Criterion) {
    let cfg = MarkerConfig::default();
    let engine = ConstraintEngine::new(large_vocab(&cfg), cfg).unwrap();
    let target = message(40);
    let session = engine.open(&target).unwrap();

    c.bench_function("open", |b| b.iter(|| engine.open(&target).unwrap()));
    c.bench_function("first mask", |b| b.iter(|| session.allowed_tokens().unwrap()));
    // Greedy decode taking the longest allowed content token at each step.
    c.bench_function("full decode", |b| {
        b.iter_batched(
            || session.clone(),
            |mut s| {
                while !s.is_done() {
                    let mask = s.allowed_tokens().unwrap();
                    let pick = mask
                        .iter()
                        .copied()
                        .max_by_key(|&t| engine.vocab().bytes(t).map_or(0, <[u8]>::len))
                        .unwrap();
                    s.advance(pick).unwrap();
                }
                s
            },
            BatchSize::SmallInput,
        )
    });
}

fn assignment(c: &mut Criterion) {
    let (gold, pred) = (spans(40, 0), spans(40, 3));
    c.bench_function("assignment 40x40", |b| b.iter(|| optimal_assignment(&gold, &pred)));
}

fn grammar(c: &mut Criterion) {
    let cfg = MarkerConfig::default();
    let text = message(60);
    let s = word_spans(&text, 3);
    let annotated = render(&text, &s, &cfg).unwrap();
    c.bench_function("render", |b| b.iter(|| render(&text, &s, &cfg).unwrap()));
    c.bench_function("parse", |b| b.iter(|| parse(&annotated, &text, &cfg).unwrap()));
}

criterion_group!(benches, constraint, assignment, grammar);
criterion_main!(benches);
