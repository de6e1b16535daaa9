//! Exact rational re-derivations of the cost formulas.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use nxcore::cost_model::{self, CostParams, IoCost};
use rand::Rng;

pub fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn real(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Exact `(read, write)` for one row.
pub struct Exact {
    pub read: BigRational,
    pub write: BigRational,
}

struct Terms {
    edges: BigRational,
    interval: BigRational,
    hub: BigRational,
    b_m: BigRational,
    ping_pong: BigRational,
}

fn terms(p: &CostParams) -> Terms {
    Terms {
        edges: int(p.m) * int(p.b_e),
        interval: int(p.n) * int(p.b_a),
        hub: int(p.m) * int(p.b_a + p.b_v) / real(p.d),
        b_m: real(p.b_m),
        ping_pong: int(2) * int(p.n) * int(p.b_a),
    }
}

/// `None` when the budget is below `2n·B_a`.
pub fn spu(p: &CostParams) -> Option<Exact> {
    let t = terms(p);
    if t.b_m < t.ping_pong {
        return None;
    }
    let read = t.edges + t.ping_pong - t.b_m;
    Some(Exact {
        read: if read.is_negative() { BigRational::zero() } else { read },
        write: BigRational::zero(),
    })
}

pub fn dpu(p: &CostParams) -> Exact {
    mpu_at(p, BigRational::one())
}

pub fn mpu_continuous(p: &CostParams) -> Exact {
    let t = terms(p);
    let f = BigRational::one() - &t.b_m / &t.ping_pong;
    mpu_at(p, if f.is_negative() { BigRational::zero() } else { f })
}

pub fn mpu_integral(p: &CostParams) -> Exact {
    mpu_at(p, int((p.p - p.q) as u64) / int(p.p as u64))
}

fn mpu_at(p: &CostParams, f: BigRational) -> Exact {
    let t = terms(p);
    let write = &f * &f * t.hub + f * t.interval;
    Exact {
        read: t.edges + &write,
        write,
    }
}

pub fn turbograph_like(p: &CostParams) -> Exact {
    let t = terms(p);
    let read = &t.edges + int(2) * &t.interval * &t.interval / &t.b_m + &t.interval;
    Exact {
        read,
        write: t.interval,
    }
}

pub fn b_mpu_total(p: &CostParams) -> BigRational {
    let e = mpu_continuous(p);
    let t = terms(p);
    int(2) * e.write + t.edges
}

/// Whether `x` lies within one ulp of the exact value.
pub fn within_ulp(x: f64, exact: &BigRational) -> bool {
    let ulp = x.abs().next_up() - x.abs();
    (real(x) - exact).abs() <= real(ulp)
}

fn cost_ok(c: &IoCost, e: &Exact) -> bool {
    within_ulp(c.read, &e.read) && within_ulp(c.write, &e.write)
}

/// A random parameter point spanning desk to web scale.
pub fn random_params<R: Rng>(rng: &mut R) -> CostParams {
    let n = rng.random_range(1..=10_000_000_000u64);
    let m = rng.random_range(1..=100_000_000_000u64);
    let b_a = rng.random_range(1..=64u64);
    let b_v = rng.random_range(1..=8u64);
    let b_e = rng.random_range(1..=16u64);
    let d = rng.random_range(1.0..64.0);
    let p = rng.random_range(1..=256u32);
    let q = rng.random_range(0..=p);
    let top = 2.0 * n as f64 * b_a as f64 + m as f64 * b_e as f64;
    let b_m = if rng.random_bool(0.1) {
        2.0 * n as f64 * b_a as f64
    } else {
        rng.random_range(1.0..1.5 * top)
    };
    CostParams {
        n,
        m,
        b_a,
        b_v,
        b_e,
        b_m,
        d,
        p,
        q,
    }
}

/// Checks every row at one point; returns the names of rows that fail.
pub fn check_point(p: &CostParams) -> Vec<&'static str> {
    let mut bad = Vec::new();
    match (cost_model::io_spu(p), spu(p)) {
        (Ok(c), Some(e)) if cost_ok(&c, &e) => {}
        (Err(_), None) => {}
        _ => bad.push("spu"),
    }
    if !cost_ok(&cost_model::io_dpu(p).unwrap(), &dpu(p)) {
        bad.push("dpu");
    }
    if !cost_ok(&cost_model::io_mpu_continuous(p).unwrap(), &mpu_continuous(p)) {
        bad.push("mpu");
    }
    if !cost_ok(&cost_model::io_mpu(p).unwrap(), &mpu_integral(p)) {
        bad.push("mpu-integral");
    }
    if !cost_ok(&cost_model::io_turbograph_like(p).unwrap(), &turbograph_like(p)) {
        bad.push("turbograph-like");
    }
    if !within_ulp(cost_model::b_mpu_total(p).unwrap(), &b_mpu_total(p)) {
        bad.push("b_mpu");
    }
    bad
}
