mod common;

use common::*;

#[test]
fn solver_matches_dense_scan() {
    let mut bad = Vec::new();
    for (i, q) in oracle_battery().iter().enumerate() {
        let (_, solver) = evaluate(q);
        let reference = dense::evaluate(q);
        if !agree(reference, solver, 1e-3) {
            bad.push((i, reference, solver));
        }
    }
    assert!(bad.is_empty(), "disagreements: {bad:?}");
}

#[test]
fn lattice_gap_shrinks_with_denominator() {
    let battery = oracle_battery();
    let worst: Vec<f64> = [60, 120, 240, 480]
        .iter()
        .map(|&d| {
            battery
                .iter()
                .map(|q| evaluate_at(q, d))
                .filter(|(o, s)| o.is_finite() && s.is_finite())
                .map(|(o, s)| (o - s).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    println!("max |type - solver| at denominators 60, 120, 240, 480: {worst:?}");
    assert!(worst.windows(2).all(|w| w[1] <= w[0]), "{worst:?}");
    assert!(worst[3] < 0.01, "{worst:?}");
}

#[test]
fn empty_sets_agree() {
    for (i, q) in oracle_battery().iter().enumerate() {
        let (o, s) = evaluate(q);
        assert_eq!(o.is_infinite(), s.is_infinite(), "query {i}: oracle {o}, solver {s}");
    }
}

#[test]
fn oracle_measures_match_library() {
    let it = InputType::new(2, 3);
    let w = bsc(0.2);
    let t = TypeKernel { k: [12, 50] };
    let p = it.dist();
    let k = it.kernel(t);
    let mi = jcas::info::mutual_information(&p, &k).unwrap();
    assert!((it.mi(t) - mi).abs() < 1e-12);
    let d = jcas::info::conditional_kl_of(k.rows(), &w, p.probs());
    assert!((it.divergence(t, &w) - d).abs() < 1e-12);
    let x = jcas::bistatic::cross_entropy_of(p.probs(), k.rows(), &w);
    assert!((it.nll(t, &w) - x).abs() < 1e-12);
}

#[test]
fn beta_oracle_is_empty_at_zero_rate() {
    let it = InputType::new(1, 1);
    assert!(oracle_beta(&bsc(0.3), it, TypeKernel { k: [20, 40] }, 0.0).is_infinite());
    let w = bsc(0.3);
    let p_hat = it.kernel(TypeKernel { k: [20, 40] });
    assert!(dense::beta(&w, it.px(), p_hat.rows(), 0.0, 1000).is_infinite());
}
