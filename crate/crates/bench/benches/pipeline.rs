use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use dikt_core::eval::{auc, build_prediction_records, kc_difficulty_agreement};
use dikt_core::simulate::{generate_corpus, recovery_train_config, SimConfig};
use dikt_core::trainer::{build_training_examples, fine_tune};
use dikt_core::{
    build_knowledge_prompt, gradients, predict, DirectProvider, IRTParams, MockProvider, Speaker,
    Turn,
};

fn bench_irt(c: &mut Criterion) {
    let params = IRTParams::with_alpha(1.5);
    c.bench_function("irt_predict", |b| {
        b.iter(|| predict(black_box(0.8), black_box(-0.3), &params).unwrap())
    });
    c.bench_function("irt_gradients", |b| {
        b.iter(|| gradients(black_box(0.8), black_box(-0.3), &params, true).unwrap())
    });
}

fn bench_prompt_render(c: &mut Criterion) {
    let history: Vec<Turn> = (0..20)
        .map(|i| Turn {
            index: i,
            speaker: if i % 2 == 0 {
                Speaker::Tutor
            } else {
                Speaker::Student
            },
            text: format!("turn {i} with a realistic amount of tutoring text in it"),
        })
        .collect();
    c.bench_function("knowledge_prompt_20_turns", |b| {
        b.iter(|| build_knowledge_prompt(black_box("What is 3/4 of 16?"), &history).unwrap())
    });
}

fn bench_auc(c: &mut Criterion) {
    let labels: Vec<bool> = (0..5000).map(|i| i % 3 != 0).collect();
    let scores: Vec<f64> = (0..5000)
        .map(|i| (i as f64 * 0.37).sin() * 0.5 + 0.5)
        .collect();
    c.bench_function("auc_5000", |b| {
        b.iter(|| auc(black_box(&labels), black_box(&scores)).unwrap())
    });
}

fn small_fixture() -> SimConfig {
    SimConfig {
        n_dialogues: 40,
        pairs_per_dialogue: 6,
        n_kcs: 8,
        kcs_per_dialogue: 2,
        ..SimConfig::recovery_fixture()
    }
}

fn bench_simulate_and_estimate(c: &mut Criterion) {
    c.bench_function("generate_corpus_40x6", |b| {
        b.iter(|| generate_corpus(black_box(&small_fixture())).unwrap())
    });

    let (corpus, _) = generate_corpus(&small_fixture()).unwrap();
    let provider = MockProvider::constant(0.7, 0.2);
    let irt = IRTParams::default();
    c.bench_function("prediction_records_40x6", |b| {
        b.iter(|| build_prediction_records(black_box(&corpus), &provider, &irt).unwrap())
    });

    let records = build_prediction_records(&corpus, &provider, &irt).unwrap();
    c.bench_function("kc_difficulty_agreement", |b| {
        b.iter(|| kc_difficulty_agreement(black_box(&records), 5).unwrap())
    });
}

fn bench_training(c: &mut Criterion) {
    let (corpus, _) = generate_corpus(&small_fixture()).unwrap();
    c.bench_function("build_training_examples_40x6", |b| {
        b.iter(|| build_training_examples(black_box(&corpus)).unwrap())
    });

    let mut cfg = recovery_train_config(1);
    cfg.epochs = 1;
    c.bench_function("fine_tune_epoch_direct_40x6", |b| {
        b.iter_batched(
            || {
                (
                    DirectProvider::for_corpus(&corpus).unwrap(),
                    IRTParams::default(),
                )
            },
            |(mut provider, mut irt)| {
                fine_tune(&corpus, &corpus, &mut provider, &mut irt, &cfg).unwrap()
            },
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(
    benches,
    bench_irt,
    bench_prompt_render,
    bench_auc,
    bench_simulate_and_estimate,
    bench_training
);
criterion_main!(benches);
