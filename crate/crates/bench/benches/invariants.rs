use criterion::{black_box, criterion_group, criterion_main, Criterion};
use flatflow::fixtures::{HYPERBOLIC, POINCARE};
use flatflow::quat::{Axis, ExactCircleElement};
use flatflow::rational::ratio;
use flatflow::rho::{CoverData, FixedPointFamily};
use flatflow::{parse_plan, rho_finite_image, rho_lens_space, run_plan, ComputationPlan};
use serde_json::Value;

/// The fixture with every task except `id` removed.
fn single_task(fixture: &str, id: &str) -> ComputationPlan {
    let mut doc: Value = serde_json::from_str(fixture).unwrap();
    doc["tasks"].as_array_mut().unwrap().retain(|t| t["id"] == id);
    parse_plan(&doc.to_string()).unwrap()
}

fn cohomology(c: &mut Criterion) {
    let alpha = single_task(POINCARE, "h-alpha");
    c.bench_function("cohomology/poincare_alpha", |b| b.iter(|| run_plan(black_box(&alpha))));
    let path = single_task(POINCARE, "path-certificate");
    c.bench_function("cohomology/extended_path_certificate", |b| b.iter(|| run_plan(black_box(&path))));
}

fn rho(c: &mut Criterion) {
    let families = [
        FixedPointFamily { count: 24, period: 24, theta1_step: ratio(1, 60), theta2_step: ratio(1, 60) },
        FixedPointFamily { count: 40, period: 40, theta1_step: ratio(1, 60), theta2_step: ratio(1, 60) },
        FixedPointFamily { count: 60, period: 60, theta1_step: ratio(1, 120), theta2_step: ratio(1, 120) },
    ];
    let image = ExactCircleElement::new(Axis::I, ratio(-1, 120));
    c.bench_function("rho/finite_image_z120", |b| {
        b.iter(|| {
            let cover = CoverData::from_fixed_points(120, &image, black_box(&families), |_| 0.0).unwrap();
            rho_finite_image(&cover)
        })
    });
    c.bench_function("rho/lens_p47_all", |b| {
        b.iter(|| {
            for q in 1..47 {
                for k in 1..47 {
                    black_box(rho_lens_space(47, q, k).unwrap());
                }
            }
        })
    });
}

fn plans(c: &mut Criterion) {
    let cs = single_task(HYPERBOLIC, "cs");
    c.bench_function("cs/hyperbolic", |b| b.iter(|| run_plan(black_box(&cs))));
    for (name, text) in [("poincare", POINCARE), ("hyperbolic", HYPERBOLIC)] {
        c.bench_function(&format!("plan/parse_{name}"), |b| b.iter(|| parse_plan(black_box(text)).unwrap()));
        let plan = parse_plan(text).unwrap();
        c.bench_function(&format!("plan/run_{name}"), |b| b.iter(|| run_plan(black_box(&plan))));
    }
}

criterion_group!(benches, cohomology, rho, plans);
criterion_main!(benches);
