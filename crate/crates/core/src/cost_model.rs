//! Closed-form per-iteration I/O volumes of the update strategies.
//!
//! Integer inputs are combined in double-double arithmetic and rounded once,
//! so every returned value is within one ulp of the exact rational result.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph_model::SubShardId;
use crate::storage::{IoCategory, IoSnapshot, ShardSetInfo};

/// Inputs to every formula. Byte sizes are per item.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub n: u64,
    pub m: u64,
    /// Attribute bytes.
    pub b_a: u64,
    /// Vertex-id bytes.
    pub b_v: u64,
    /// Bytes per stored edge.
    pub b_e: u64,
    /// Memory budget in bytes.
    pub b_m: f64,
    /// Average in-degree of destinations in hubbed sub-shards.
    pub d: f64,
    pub p: u32,
    /// Resident intervals for the integral MPU form.
    pub q: u32,
}

impl CostParams {
    /// Web-scale constants used for the ratio curve.
    pub fn yahoo() -> Self {
        CostParams {
            n: 720_000_000,
            m: 6_630_000_000,
            b_a: 8,
            b_v: 4,
            b_e: 4,
            b_m: 2.0 * 720_000_000.0 * 8.0,
            d: 15.0,
            p: 16,
            q: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.b_a == 0 || self.b_v == 0 || self.b_e == 0 {
            return Err(Error::InvalidInput("n, m and all byte sizes must be positive".into()));
        }
        if !(self.d >= 1.0 && self.d.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "d = {} must be a finite value ≥ 1",
                self.d
            )));
        }
        if !(self.b_m >= 0.0 && self.b_m.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "budget {} must be finite and non-negative",
                self.b_m
            )));
        }
        if self.p == 0 || self.q > self.p {
            return Err(Error::InvalidInput(format!(
                "need 1 ≤ P and Q ≤ P, got P = {}, Q = {}",
                self.p, self.q
            )));
        }
        Ok(())
    }

    /// `2n·B_a`: memory needed to hold every interval twice.
    pub fn ping_pong_bytes(&self) -> u128 {
        2 * self.n as u128 * self.b_a as u128
    }

    /// `Q = min(P, ⌊B_M·P / (2n·B_a)⌋)`.
    pub fn resident_intervals(&self) -> u32 {
        let q = Dd::from_f64(self.b_m)
            .mul(Dd::from_u128(self.p as u128))
            .div(Dd::from_u128(self.ping_pong_bytes()));
        // Correct a possible off-by-one from the final rounding.
        let mut f = q.hi.floor();
        if Dd::from_f64(f).sub(q).hi > 0.0 {
            f -= 1.0;
        } else if q.sub(Dd::from_f64(f + 1.0)).hi >= 0.0 {
            f += 1.0;
        }
        (f.max(0.0) as u64).min(self.p as u64) as u32
    }

    fn hub_numerator(&self) -> u128 {
        self.m as u128 * (self.b_a + self.b_v) as u128
    }

    fn edge_bytes(&self) -> u128 {
        self.m as u128 * self.b_e as u128
    }

    fn interval_bytes(&self) -> u128 {
        self.n as u128 * self.b_a as u128
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoCost {
    pub read: f64,
    pub write: f64,
}

impl IoCost {
    pub fn total(&self) -> f64 {
        self.read + self.write
    }
}

/// SPU: `max(0, m·B_e + 2n·B_a − B_M)` read, nothing written. Needs `B_M ≥ 2n·B_a`.
pub fn io_spu(p: &CostParams) -> Result<IoCost> {
    p.validate()?;
    let need = p.ping_pong_bytes();
    if Dd::from_f64(p.b_m).sub(Dd::from_u128(need)).hi < 0.0 {
        return Err(Error::InfeasibleBudget {
            budget: p.b_m as u64,
            required: need.min(u64::MAX as u128) as u64,
        });
    }
    let read = Dd::from_u128(p.edge_bytes() + need)
        .sub(Dd::from_f64(p.b_m))
        .round()
        .max(0.0);
    Ok(IoCost { read, write: 0.0 })
}

/// DPU: independent of `B_M` and `P`.
pub fn io_dpu(p: &CostParams) -> Result<IoCost> {
    p.validate()?;
    Ok(mpu_with_fraction(p, Dd::from_f64(1.0)))
}

/// MPU with the integral residency `p.q`, using `f = (P − Q)/P`.
pub fn io_mpu(p: &CostParams) -> Result<IoCost> {
    p.validate()?;
    let f = Dd::from_u128((p.p - p.q) as u128).div(Dd::from_u128(p.p as u128));
    Ok(mpu_with_fraction(p, f))
}

/// MPU with the continuous residency `f = 1 − B_M/(2n·B_a)`, clamped to `[0, 1]`.
pub fn io_mpu_continuous(p: &CostParams) -> Result<IoCost> {
    p.validate()?;
    Ok(mpu_with_fraction(p, continuous_fraction(p)))
}

/// Streaming several resident intervals at a time with `P = 2n·B_a/B_M`.
pub fn io_turbograph_like(p: &CostParams) -> Result<IoCost> {
    p.validate()?;
    if p.b_m <= 0.0 {
        return Err(Error::InvalidInput(
            "the streaming-interval strategy needs a positive budget".into(),
        ));
    }
    let nba = Dd::from_u128(p.interval_bytes());
    let middle = nba.mul(nba).mul(Dd::from_f64(2.0)).div(Dd::from_f64(p.b_m));
    let read = Dd::from_u128(p.edge_bytes() + p.interval_bytes()).add(middle).round();
    Ok(IoCost {
        read,
        write: nba.round(),
    })
}

/// Read plus write of MPU at the best continuous residency.
pub fn b_mpu_total(p: &CostParams) -> Result<f64> {
    p.validate()?;
    let f = continuous_fraction(p);
    let hub = f
        .mul(f)
        .mul(Dd::from_u128(2 * p.hub_numerator()))
        .div(Dd::from_f64(p.d));
    let intervals = f.mul(Dd::from_u128(2 * p.interval_bytes()));
    Ok(Dd::from_u128(p.edge_bytes()).add(hub).add(intervals).round())
}

/// Total volume of the streaming-interval strategy, `m·B_e + 2(n·B_a)²/B_M + n·B_a`.
pub fn b_tg_total(p: &CostParams) -> Result<f64> {
    io_turbograph_like(p).map(|c| c.read)
}

fn continuous_fraction(p: &CostParams) -> Dd {
    let need = Dd::from_u128(p.ping_pong_bytes());
    let f = need.sub(Dd::from_f64(p.b_m)).div(need);
    if f.hi < 0.0 {
        Dd::from_f64(0.0)
    } else {
        f
    }
}

fn mpu_with_fraction(p: &CostParams, f: Dd) -> IoCost {
    let hub = f.mul(f).mul(Dd::from_u128(p.hub_numerator())).div(Dd::from_f64(p.d));
    let intervals = f.mul(Dd::from_u128(p.interval_bytes()));
    let write = hub.add(intervals);
    IoCost {
        read: Dd::from_u128(p.edge_bytes()).add(write).round(),
        write: write.round(),
    }
}

/// Budget grid `LO + (HI − LO)·k/STEPS` for `k = 1..=STEPS`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: u32,
}

impl BudgetGrid {
    /// The grid over `(0, 2n·B_a]`.
    pub fn up_to_ping_pong(p: &CostParams, steps: u32) -> Self {
        BudgetGrid {
            lo: 0.0,
            hi: p.ping_pong_bytes() as f64,
            steps,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.steps).map(move |k| {
            if k == self.steps {
                self.hi
            } else {
                self.lo + (self.hi - self.lo) * k as f64 / self.steps as f64
            }
        })
    }
}

impl FromStr for BudgetGrid {
    type Err = Error;

    /// Parses `LO:HI:STEPS`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("budget grid `{s}` is not LO:HI:STEPS"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let steps: u32 = steps.trim().parse().map_err(|_| bad())?;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) || steps == 0 {
            return Err(bad());
        }
        Ok(BudgetGrid { lo, hi, steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub b_m: f64,
    pub b_mpu: f64,
    pub b_tg: f64,
    pub ratio: f64,
}

pub fn ratio_curve(p: &CostParams, grid: &BudgetGrid) -> Result<Vec<CurvePoint>> {
    grid.points()
        .map(|b_m| {
            let at = CostParams { b_m, ..*p };
            let b_mpu = b_mpu_total(&at)?;
            let b_tg = b_tg_total(&at)?;
            Ok(CurvePoint {
                b_m,
                b_mpu,
                b_tg,
                ratio: b_mpu / b_tg,
            })
        })
        .collect()
}

pub const CURVE_HEADER: &str = "b_m,b_mpu,b_tg,ratio";

/// CSV with a header line and one decimal row per point.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for pt in points {
        out.push_str(&format!("{},{},{},{}\n", pt.b_m, pt.b_mpu, pt.b_tg, pt.ratio));
    }
    out
}

/// One line per strategy at the given budget, MPU in its continuous form;
/// infeasible rows carry the error.
pub fn table_rows(p: &CostParams) -> Vec<(&'static str, Result<IoCost>)> {
    vec![
        ("turbograph-like", io_turbograph_like(p)),
        ("spu", io_spu(p)),
        ("dpu", io_dpu(p)),
        ("mpu", io_mpu_continuous(p)),
    ]
}

/// Average in-degree of destinations over the sub-shards that get hubs
/// under residency `q`: their edges divided by their destination records.
pub fn measured_d(set: &ShardSetInfo, p: u32, q: u32) -> Option<f64> {
    let (mut edges, mut dsts) = (0u64, 0u64);
    for i in q..p {
        for j in q..p {
            let info = set.get(SubShardId::new(i, j), p);
            edges += info.edges;
            dsts += info.dsts;
        }
    }
    (dsts > 0).then(|| edges as f64 / dsts as f64)
}

/// Per-category byte volumes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CategoryBytes {
    pub subshard_read: f64,
    pub interval_read: f64,
    pub interval_write: f64,
    pub hub_read: f64,
    pub hub_write: f64,
}

impl CategoryBytes {
    pub fn from_snapshot(s: &IoSnapshot) -> Self {
        CategoryBytes {
            subshard_read: s.get(IoCategory::SubShard).bytes_read as f64,
            interval_read: s.get(IoCategory::Interval).bytes_read as f64,
            interval_write: s.get(IoCategory::Interval).bytes_written as f64,
            hub_read: s.get(IoCategory::Hub).bytes_read as f64,
            hub_write: s.get(IoCategory::Hub).bytes_written as f64,
        }
    }

    fn rows(&self) -> [(&'static str, f64); 5] {
        [
            ("subshard_read", self.subshard_read),
            ("interval_read", self.interval_read),
            ("interval_write", self.interval_write),
            ("hub_read", self.hub_read),
            ("hub_write", self.hub_write),
        ]
    }
}

/// Model split per category for residency `p.q`, with `f = (P − Q)/P`.
pub fn predict_categories(p: &CostParams) -> Result<CategoryBytes> {
    p.validate()?;
    let f = Dd::from_u128((p.p - p.q) as u128).div(Dd::from_u128(p.p as u128));
    let hub = f
        .mul(f)
        .mul(Dd::from_u128(p.hub_numerator()))
        .div(Dd::from_f64(p.d))
        .round();
    let intervals = f.mul(Dd::from_u128(p.interval_bytes())).round();
    Ok(CategoryBytes {
        subshard_read: p.edge_bytes() as f64,
        interval_read: intervals,
        interval_write: intervals,
        hub_read: hub,
        hub_write: hub,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconcileLine {
    pub category: &'static str,
    pub measured: f64,
    pub predicted: f64,
    pub allowance: f64,
    /// Measured exceeds predicted plus allowance.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconciliation {
    pub lines: Vec<ReconcileLine>,
}

impl Reconciliation {
    pub fn ok(&self) -> bool {
        self.lines.iter().all(|l| !l.flagged)
    }
}

impl fmt::Display for Reconciliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(
                f,
                "{} measured={} predicted={} allowance={} {}",
                l.category,
                l.measured,
                l.predicted,
                l.allowance,
                if l.flagged { "OVER" } else { "ok" }
            )?;
        }
        Ok(())
    }
}

/// Compares measured traffic with a prediction, allowing `allowance` bytes of
/// headers and other metadata per category.
pub fn reconcile(measured: &CategoryBytes, predicted: &CategoryBytes, allowance: &CategoryBytes) -> Reconciliation {
    let lines = measured
        .rows()
        .into_iter()
        .zip(predicted.rows())
        .zip(allowance.rows())
        .map(|(((category, m), (_, p)), (_, a))| ReconcileLine {
            category,
            measured: m,
            predicted: p,
            allowance: a,
            flagged: m > p + a,
        })
        .collect();
    Reconciliation { lines }
}

/// Unevaluated sum `hi + lo` carrying about 106 bits.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn from_u128(x: u128) -> Self {
        let hi = x as f64;
        let rest = x as i128 - hi as i128;
        quick_two_sum(hi, rest as f64)
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from_f64(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from_f64(q2)));
        let q3 = r.hi / o.hi;
        let q = quick_two_sum(q1, q2);
        q.add(Dd::from_f64(q3))
    }

    fn round(self) -> f64 {
        self.hi + self.lo
    }
}
