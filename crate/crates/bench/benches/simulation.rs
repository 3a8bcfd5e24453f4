use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use fluorosim_bench::{default_config, template_anatomy};
use fluorosim_core::geometry::make_projection;
use fluorosim_core::labels::ViewName;
use fluorosim_core::recognize::{featurize_sequence, FeatureSpace};
use fluorosim_core::rng::stream_rng;
use fluorosim_core::simulation::view::desired_view;
use fluorosim_core::simulation::{run_sequence, sample_view, start_sequence};

fn sequences(c: &mut Criterion) {
    let (anatomy, config) = (template_anatomy(), default_config());
    let mut seed = 0;
    c.bench_function("run_sequence", |b| {
        b.iter(|| {
            seed += 1;
            run_sequence(0, seed, anatomy.clone(), config.clone()).unwrap()
        })
    });
}

fn hunting(c: &mut Criterion) {
    let mut rng = stream_rng(1, 0);
    let mut state = start_sequence(&mut rng, 0, 1, template_anatomy(), default_config()).unwrap();
    let desired = desired_view(&state, state.views.get(ViewName::Inlet));
    let start = state.view;
    c.bench_function("sample_view", |b| {
        b.iter(|| {
            state.view = start;
            sample_view(&mut rng, &mut state, black_box(&desired))
        })
    });
}

fn projection(c: &mut Criterion) {
    let mut rng = stream_rng(2, 0);
    let state = start_sequence(&mut rng, 0, 2, template_anatomy(), default_config()).unwrap();
    let points: Vec<_> = state.anatomy.landmarks.iter().map(|l| l.position).collect();
    c.bench_function("make_projection", |b| {
        b.iter(|| {
            make_projection(
                black_box(&state.view.viewpoint),
                black_box(&state.view.ray),
                &state.camera,
                state.source_viewpoint_mm,
            )
            .unwrap()
        })
    });
    let p = state.projection();
    c.bench_function("project_landmarks", |b| {
        b.iter(|| points.iter().map(|x| p.project(black_box(x)).unwrap().x).sum::<f64>())
    });
}

fn features(c: &mut Criterion) {
    let records = run_sequence(0, 3, template_anatomy(), default_config()).unwrap();
    let space = FeatureSpace::default();
    c.bench_function("featurize_sequence", |b| {
        b.iter(|| featurize_sequence(black_box(&records), &space, &mut stream_rng(4, 2), 0.05))
    });
}

criterion_group!(benches, sequences, hunting, projection, features);
criterion_main!(benches);
