mod common;

use common::{check_point, int, random_params, real};
use num_traits::ToPrimitive;
use nxcore::cost_model::{self, BudgetGrid, CostParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn thousand_points_within_one_ulp() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        assert!(check_point(&p).is_empty(), "{:?} fails at {p:?}", check_point(&p));
    }
}

#[test]
fn yahoo_curve_matches_exact_ratio() {
    let p = CostParams::yahoo();
    let grid = BudgetGrid::up_to_ping_pong(&p, 100);
    for pt in cost_model::ratio_curve(&p, &grid).unwrap() {
        let at = CostParams { b_m: pt.b_m, ..p };
        let exact = common::b_mpu_total(&at) / common::turbograph_like(&at).read;
        assert!((pt.ratio - exact.to_f64().unwrap()).abs() < 1e-15);
        assert!(pt.ratio < 1.0);
    }
}

#[test]
fn residency_matches_exact_floor() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let exact = (real(p.b_m) * int(p.p as u64) / (int(2) * int(p.n) * int(p.b_a))).floor();
        let expect = exact.to_integer().min((p.p as u64).into());
        assert_eq!(num_bigint::BigInt::from(p.resident_intervals()), expect, "{p:?}");
    }
}

proptest! {
    #[test]
    fn every_row_within_one_ulp(seed in any::<u64>()) {
        let p = random_params(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(check_point(&p).is_empty(), "{:?}", p);
    }

    #[test]
    fn mpu_between_spu_and_dpu(seed in any::<u64>(), frac in 0.0f64..=1.0) {
        let base = random_params(&mut ChaCha8Rng::seed_from_u64(seed));
        let pp = base.ping_pong_bytes() as f64;
        let p = CostParams { b_m: pp * frac, ..base };
        let mpu = cost_model::io_mpu_continuous(&p).unwrap().total();
        let dpu = cost_model::io_dpu(&p).unwrap().total();
        let spu = cost_model::io_spu(&CostParams { b_m: pp, ..p }).unwrap().total();
        prop_assert!(mpu <= dpu);
        prop_assert!(mpu >= spu * (1.0 - 1e-15));
    }

    #[test]
    fn mpu_monotone_in_q(seed in any::<u64>()) {
        let base = random_params(&mut ChaCha8Rng::seed_from_u64(seed));
        let totals: Vec<f64> = (0..=base.p)
            .map(|q| cost_model::io_mpu(&CostParams { q, ..base }).unwrap().total())
            .collect();
        prop_assert!(totals.windows(2).all(|w| w[1] <= w[0]));
    }
}
