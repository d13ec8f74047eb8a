use hocmim_core::hocmim::{hocmim_score, hocmim_score_exhaustive};
use hocmim_core::synth::{random_dataset, toy_dataset, TOY_CSV};
use hocmim_core::{
    apply_binning, fit_binning, make_splits, read_csv, run_sfs, Criterion, CriterionKind,
    EstimatorContext, EstimatorKind, HocmimParams, SplitSpec, Var,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn toy_orders_for_low_order_criteria() {
    let ds = toy_dataset();
    let ctx = EstimatorContext::plugin(&ds);
    let cmim = run_sfs(&ctx, &Criterion::new(CriterionKind::Cmim), 5).unwrap();
    assert_eq!(cmim.names, ["X3", "X2", "X4", "X5", "X1"]);
    let mim = run_sfs(&ctx, &Criterion::new(CriterionKind::Mim), 2).unwrap();
    assert_eq!(mim.names, ["X3", "X5"]);
}

#[test]
fn every_criterion_yields_a_permutation() {
    let ds = toy_dataset();
    let ctx = EstimatorContext::plugin(&ds);
    let best = (0..5)
        .map(|k| ctx.mutual_information(&[Var::Feature(k)], &[Var::Target]).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    for kind in CriterionKind::ALL {
        let r = run_sfs(&ctx, &Criterion::new(kind), 5).unwrap();
        let mut sorted = r.order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4], "{kind:?}");
        assert_eq!(r.scores[0], best);
        assert_eq!(r.total_mi_calls, r.step_mi_calls.iter().sum::<u64>());
    }
}

#[test]
fn csv_to_selection_with_train_fitted_bins() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut csv = String::from("signal,noise,label\n");
    for _ in 0..200 {
        let y: u32 = rng.gen_range(0..2);
        let signal = f64::from(y) * 5.0 + rng.gen_range(0.0..4.0);
        let noise: f64 = rng.gen_range(-3.0..3.0);
        csv.push_str(&format!("{signal},{noise},{}\n", if y == 1 { "yes" } else { "no" }));
    }
    let table = read_csv(csv.as_bytes(), "label").unwrap();
    let split = &make_splits(table.n_rows(), &SplitSpec { n_repeats: 1, ..Default::default() }).unwrap()[0];
    let spec = fit_binning(&table, 4, &split.train).unwrap();
    let ds = apply_binning(&table, &spec).unwrap();
    assert_eq!(ds.n_classes(), 2);
    let train = ds.select_rows(&split.train).unwrap();
    for kind in [EstimatorKind::PlugIn, EstimatorKind::Shrinkage] {
        let ctx = EstimatorContext::new(&train, kind).unwrap();
        let r = run_sfs(&ctx, &Criterion::hocmim(HocmimParams::default()).unwrap(), 2).unwrap();
        assert_eq!(r.names, ["signal", "noise"]);
    }
}

#[test]
fn bundled_csv_matches_dataset() {
    let table = read_csv(TOY_CSV.as_bytes(), "Y").unwrap();
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    let ds = apply_binning(&table, &fit_binning(&table, 5, &rows).unwrap()).unwrap();
    assert_eq!(ds, toy_dataset());
}

#[test]
fn exhaustive_never_beats_greedy() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let d = rng.gen_range(3..=8);
        let n_rows = rng.gen_range(10..=64);
        let arities: Vec<u32> = (0..d).map(|_| rng.gen_range(2..=3)).collect();
        let ds = random_dataset(&mut rng, d, n_rows, &arities, 2);
        let ctx = EstimatorContext::plugin(&ds);
        let k = rng.gen_range(0..d);
        let s: Vec<usize> = (0..d).filter(|&j| j != k).collect();
        for n in 1..=s.len().min(4) {
            let (greedy, _) = hocmim_score(&ctx, k, &s, &HocmimParams::fixed(n)).unwrap();
            let exact = hocmim_score_exhaustive(&ctx, k, &s, n).unwrap();
            assert!(exact <= greedy + 1e-9, "n={n}: {exact} > {greedy}");
        }
    }
}

#[test]
fn selection_is_deterministic_with_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ds = random_dataset(&mut rng, 8, 64, &[3; 8], 3);
    let ctx = EstimatorContext::plugin(&ds);
    let c = Criterion::hocmim(HocmimParams::default()).unwrap();
    let a = run_sfs(&ctx, &c, 8).unwrap();
    let b = run_sfs(&ctx, &c, 8).unwrap();
    assert_eq!(a.order, b.order);
    assert_eq!(a.scores, b.scores);
    assert_eq!(a.step_traces, b.step_traces);
    assert_eq!(a.step_mi_calls, b.step_mi_calls);
}
