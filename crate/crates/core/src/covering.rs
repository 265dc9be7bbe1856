//! Optimal covering radii: the closed form, the per-class minimum, the
//! inscribed-parallelogram bound, and a brute-force grid oracle.
//!
//! Radii are carried exactly as `m/√s`. The orbit of `γ(a, p/q)` meets every
//! `1/p × 1/q` cell in congruent parallelograms whose corner gaps are
//! `{pa}/p` and `(1 − {pa})/p`, which gives
//! `rcov = max({pa}, 1 − {pa}) / √(p² + q²)`.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::exact::{point_segment_distance_sq, Point, Rational, Segment};
use crate::parallel::{self, Execution};
use crate::trajectory::{Orbit, SlopedSpec, TrajectoryError, TrajectorySpec};

/// The value `m / √s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactRadius {
    pub m: Rational,
    pub s: u64,
}

impl ExactRadius {
    pub fn new(m: Rational, s: u64) -> Self {
        assert!(s > 0, "radicand must be positive");
        assert!(!m.is_negative(), "radius numerator must be nonnegative");
        ExactRadius { m, s }
    }

    /// `value²` as an exact rational.
    pub fn squared(&self) -> Rational {
        self.m.square() / Rational::from(self.s)
    }

    /// One rounding of `m²/s`, then a correctly rounded square root.
    pub fn to_f64(&self) -> f64 {
        self.squared().to_f64().sqrt()
    }

    pub fn scale(&self, k: &Rational) -> ExactRadius {
        ExactRadius::new(&self.m * k, self.s)
    }
}

impl Ord for ExactRadius {
    fn cmp(&self, other: &Self) -> Ordering {
        // m₁/√s₁ vs m₂/√s₂  ⇔  m₁²s₂ vs m₂²s₁ for nonnegative m
        (self.m.square() * Rational::from(other.s))
            .cmp(&(other.m.square() * Rational::from(self.s)))
    }
}

impl PartialOrd for ExactRadius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExactRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/√{}", self.m, self.s)
    }
}

impl Serialize for ExactRadius {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ExactRadius", 2)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("s", &self.s)?;
        st.end()
    }
}

/// Closed-form radius plus, optionally, what the grid oracle measured.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverReport {
    pub exact: ExactRadius,
    pub float_value: f64,
    pub oracle: Option<OracleEstimate>,
}

impl CoverReport {
    pub fn new(exact: ExactRadius) -> Self {
        let float_value = exact.to_f64();
        CoverReport {
            exact,
            float_value,
            oracle: None,
        }
    }

    pub fn with_oracle(mut self, oracle: OracleEstimate) -> Self {
        self.oracle = Some(oracle);
        self
    }

    /// `oracle ≤ formula ≤ oracle + (√2/2)/n + 10⁻¹²`. The lower side is
    /// checked exactly on squares, the upper side in floating point.
    pub fn sandwich_holds(&self) -> Option<bool> {
        self.oracle.as_ref().map(|o| {
            o.max_dist_sq <= self.exact.squared()
                && self.float_value <= o.value + o.error_bound() + SANDWICH_SLACK
        })
    }
}

/// Float slack on the upper side of the oracle sandwich.
pub const SANDWICH_SLACK: f64 = 1e-12;

impl Serialize for CoverReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CoverReport", 4)?;
        st.serialize_field("exact", &self.exact)?;
        st.serialize_field("float", &self.float_value)?;
        st.serialize_field("oracle", &self.oracle.as_ref().map(|o| o.value))?;
        st.serialize_field("grid_n", &self.oracle.as_ref().map(|o| o.n))?;
        st.end()
    }
}

/// Rectangle `ABCD` with an inscribed parallelogram whose vertex `P` sits on
/// `AB` and whose sides meet `AB` at angle `θ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelogramSpec {
    pub ap: Rational,
    pub bp: Rational,
    pub sin_theta: ExactRadius,
}

impl ParallelogramSpec {
    /// The congruent cell parallelogram of a periodic `γ(a, p/q)`.
    pub fn for_trajectory(spec: &SlopedSpec) -> Self {
        let p = spec.p() as i64;
        let f = spec.pa().frac_part();
        ParallelogramSpec {
            ap: &f / p,
            bp: (Rational::one() - f) / p,
            sin_theta: ExactRadius::new(Rational::from(p), spec.radicand()),
        }
    }
}

/// `max(|AP|, |BP|) · sin θ`.
pub fn parallelogram_cover_radius(ps: &ParallelogramSpec) -> ExactRadius {
    let longer = ps.ap.clone().max(ps.bp.clone());
    ps.sin_theta.scale(&longer)
}

pub fn covering_radius(spec: &TrajectorySpec) -> Result<ExactRadius, TrajectoryError> {
    spec.ensure_periodic()?;
    Ok(match spec {
        TrajectorySpec::Sloped(s) => {
            let f = s.pa().frac_part();
            let m = (Rational::one() - &f).max(f);
            ExactRadius::new(m, s.radicand())
        }
        // distance to the farther parallel side
        TrajectorySpec::Vertical { a } | TrajectorySpec::Horizontal { a } => {
            ExactRadius::new((Rational::one() - a).max(a.clone()), 1)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMinimum {
    pub radius: ExactRadius,
    /// Midpoints `(2k − 1)/(2p)` of the bottom subintervals.
    pub minimizers: Vec<Rational>,
}

/// Smallest covering radius among period-`2(p+q)` trajectories with `p`
/// bottom bounces: `1/(2√(p² + q²))`.
pub fn class_min_radius(p: u32, q: u32) -> Result<ClassMinimum, TrajectoryError> {
    if p == 0 || q == 0 {
        return Err(TrajectoryError::BadSlope { p, q });
    }
    if p.gcd(&q) != 1 {
        return Err(TrajectoryError::NotCoprime { p, q });
    }
    let (pp, qq) = (p as u64, q as u64);
    Ok(ClassMinimum {
        radius: ExactRadius::new(Rational::frac(1, 2), pp * pp + qq * qq),
        minimizers: midpoint_starts(p),
    })
}

pub fn midpoint_starts(p: u32) -> Vec<Rational> {
    let p = p as i64;
    (1..=p).map(|k| Rational::frac(2 * k - 1, 2 * p)).collect()
}

/// Whether the open `r`-neighbourhood of the orbit contains `T`, i.e.
/// `r > rcov`. Nonpositive `r` never covers.
pub fn covers(spec: &TrajectorySpec, r: &Rational) -> Result<bool, TrajectoryError> {
    let rc = covering_radius(spec)?;
    if !r.is_positive() {
        return Ok(false);
    }
    Ok(r.square() * Rational::from(rc.s) > rc.m.square())
}

/// What the grid oracle found: an exact lower bound on `rcov²` and where.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleEstimate {
    pub n: u32,
    pub max_dist_sq: Rational,
    pub argmax: Point,
    pub value: f64,
}

impl OracleEstimate {
    /// Every point of `T` lies within half a grid diagonal of a sample.
    pub fn error_bound(&self) -> f64 {
        std::f64::consts::FRAC_1_SQRT_2 / self.n as f64
    }
}

/// Candidates within this much (in squared distance) of the float maximum get
/// re-evaluated exactly. Float error on unit-square coordinates is ~1e-15.
const FLOAT_SCREEN: f64 = 1e-10;

struct FloatSegment {
    ax: f64,
    ay: f64,
    dx: f64,
    dy: f64,
    len_sq: f64,
}

impl FloatSegment {
    fn new(s: &Segment) -> Self {
        let (ax, ay) = s.start().to_f64();
        let (bx, by) = s.end().to_f64();
        let (dx, dy) = (bx - ax, by - ay);
        FloatSegment {
            ax,
            ay,
            dx,
            dy,
            len_sq: dx * dx + dy * dy,
        }
    }

    #[inline]
    fn dist_sq(&self, x: f64, y: f64) -> f64 {
        let (wx, wy) = (x - self.ax, y - self.ay);
        let t = ((wx * self.dx + wy * self.dy) / self.len_sq).clamp(0.0, 1.0);
        let (ex, ey) = (wx - t * self.dx, wy - t * self.dy);
        ex * ex + ey * ey
    }
}

struct RowScan {
    max: f64,
    candidates: Vec<(u32, f64)>,
}

/// `max` over the grid `(i/n, j/n)`, `0 ≤ i, j ≤ n`, of the distance to the
/// nearest orbit segment. Rows are screened in floating point; points near
/// the float maximum are then settled with exact rational distances, so the
/// result does not depend on how rows were split across threads.
pub fn grid_oracle_radius(orbit: &Orbit, n: u32) -> OracleEstimate {
    grid_oracle_radius_with(orbit, n, Execution::default())
}

pub fn grid_oracle_radius_with(orbit: &Orbit, n: u32, exec: Execution) -> OracleEstimate {
    assert!(n >= 2, "grid needs n ≥ 2");
    let segs: Vec<FloatSegment> = orbit.segments().iter().map(FloatSegment::new).collect();
    let nf = n as f64;

    let scan_row = |i: u32| -> RowScan {
        let x = i as f64 / nf;
        let mut max = f64::NEG_INFINITY;
        let mut candidates = Vec::new();
        for j in 0..=n {
            let y = j as f64 / nf;
            let d = segs
                .iter()
                .map(|s| s.dist_sq(x, y))
                .fold(f64::INFINITY, f64::min);
            if d >= max - FLOAT_SCREEN {
                if d > max {
                    max = d;
                    candidates.retain(|&(_, c)| c >= max - FLOAT_SCREEN);
                }
                candidates.push((j, d));
            }
        }
        RowScan { max, candidates }
    };
    let rows: Vec<RowScan> = parallel::map_range(0..n + 1, exec, scan_row);

    let global = rows.iter().map(|r| r.max).fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(Rational, Point)> = None;
    for (i, row) in rows.iter().enumerate() {
        for &(j, d) in &row.candidates {
            if d < global - FLOAT_SCREEN {
                continue;
            }
            let g = Point::new(
                Rational::frac(i as i64, n as i64),
                Rational::frac(j as i64, n as i64),
            );
            let (x, y) = (i as f64 / nf, j as f64 / nf);
            let exact = orbit
                .segments()
                .iter()
                .zip(&segs)
                .filter(|(_, fs)| fs.dist_sq(x, y) <= d + FLOAT_SCREEN)
                .map(|(s, _)| point_segment_distance_sq(&g, s))
                .min()
                .expect("orbit has segments");
            if best.as_ref().is_none_or(|(b, _)| exact > *b) {
                best = Some((exact, g));
            }
        }
    }
    let (max_dist_sq, argmax) = best.expect("grid is nonempty");
    OracleEstimate {
        n,
        value: max_dist_sq.to_f64().sqrt(),
        max_dist_sq,
        argmax,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::simulate_orbit;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn sloped(a: Rational, p: u32, qq: u32) -> TrajectorySpec {
        TrajectorySpec::sloped(a, p, qq).unwrap()
    }

    #[test]
    fn covering_radius_examples() {
        let r = covering_radius(&sloped(q(1, 50), 8, 5)).unwrap();
        assert_eq!(r, ExactRadius::new(q(21, 25), 89));
        assert!((r.to_f64() - 0.84 / 89f64.sqrt()).abs() < 1e-15);
        assert!((r.to_f64() - 0.089040).abs() < 1e-6);

        let r = covering_radius(&sloped(q(1, 16), 8, 5)).unwrap();
        assert_eq!(r, ExactRadius::new(q(1, 2), 89));
        assert!((r.to_f64() - 0.05300).abs() < 5e-6);

        let r = covering_radius(&TrajectorySpec::vertical(q(1, 3)).unwrap()).unwrap();
        assert_eq!(r, ExactRadius::new(q(2, 3), 1));
        assert_eq!(r.to_string(), "(2/3)/√1");

        assert!(matches!(
            covering_radius(&sloped(q(1, 2), 2, 1)),
            Err(TrajectoryError::Singular { .. })
        ));
    }

    #[test]
    fn parallelogram_examples() {
        let sin = ExactRadius::new(q(8, 1), 89);
        let l = q(3, 40);
        let even = ParallelogramSpec {
            ap: l.clone(),
            bp: l.clone(),
            sin_theta: sin.clone(),
        };
        // equal gaps: corner distance equals half the gap between opposite sides
        assert_eq!(parallelogram_cover_radius(&even), sin.scale(&l));

        let corner = ParallelogramSpec {
            ap: q(0, 1),
            bp: q(1, 8),
            sin_theta: sin.clone(),
        };
        assert_eq!(parallelogram_cover_radius(&corner), sin.scale(&q(1, 8)));

        let fig = ParallelogramSpec {
            ap: q(16, 100) / 8,
            bp: q(84, 100) / 8,
            sin_theta: sin,
        };
        assert_eq!(
            parallelogram_cover_radius(&fig),
            ExactRadius::new(q(84, 100), 89)
        );
        let from_spec =
            ParallelogramSpec::for_trajectory(sloped(q(1, 50), 8, 5).as_sloped().unwrap());
        assert_eq!(from_spec, fig);
    }

    #[test]
    fn class_min_examples() {
        let c = class_min_radius(8, 5).unwrap();
        assert_eq!(c.radius, ExactRadius::new(q(1, 2), 89));
        assert_eq!(c.minimizers.len(), 8);
        assert_eq!(c.minimizers[0], q(1, 16));
        assert_eq!(c.minimizers[7], q(15, 16));
        assert_eq!(
            class_min_radius(1, 1).unwrap().radius,
            ExactRadius::new(q(1, 2), 2)
        );
        assert_eq!(
            class_min_radius(5, 1).unwrap().radius,
            ExactRadius::new(q(1, 2), 26)
        );
        assert!(matches!(
            class_min_radius(4, 2),
            Err(TrajectoryError::NotCoprime { .. })
        ));
    }

    #[test]
    fn covers_examples() {
        let s = sloped(q(1, 16), 8, 5);
        assert!(covers(&s, &q(1, 10)).unwrap());
        // 89·(53/1000)² = 0.250001 just clears 1/4; 529/10000 falls short
        assert!(covers(&s, &q(53, 1000)).unwrap());
        assert!(!covers(&s, &q(529, 10000)).unwrap());
        let v = TrajectorySpec::vertical(q(1, 2)).unwrap();
        assert!(!covers(&v, &q(1, 2)).unwrap());
        assert!(covers(&v, &q(501, 1000)).unwrap());
        assert!(!covers(&v, &q(-1, 1)).unwrap());
    }

    #[test]
    fn oracle_vertical_small_grid() {
        let orbit = simulate_orbit(&TrajectorySpec::vertical(q(1, 2)).unwrap()).unwrap();
        let est = grid_oracle_radius(&orbit, 2);
        assert_eq!(est.max_dist_sq, q(1, 4));
        assert_eq!(est.value, 0.5);
        assert_eq!(est.argmax, Point::new(q(0, 1), q(0, 1)));
    }

    #[test]
    fn oracle_sandwich_moderate_grid() {
        for (a, p, qq) in [(q(1, 16), 8, 5), (q(1, 50), 8, 5), (q(1, 3), 2, 3)] {
            let spec = sloped(a, p, qq);
            let orbit = simulate_orbit(&spec).unwrap();
            let report = CoverReport::new(covering_radius(&spec).unwrap())
                .with_oracle(grid_oracle_radius(&orbit, 240));
            assert_eq!(report.sandwich_holds(), Some(true), "{spec}");
        }
    }

    #[test]
    fn oracle_independent_of_execution() {
        let orbit = simulate_orbit(&sloped(q(2, 7), 3, 4)).unwrap();
        let seq = grid_oracle_radius_with(&orbit, 150, Execution::Sequential);
        let par = grid_oracle_radius_with(&orbit, 150, Execution::Parallel);
        assert_eq!(seq, par);
    }

    #[test]
    fn report_json_shape() {
        let report = CoverReport::new(ExactRadius::new(q(1, 2), 89));
        let v = serde_json::to_value(&report).unwrap();
        assert_eq!(v["exact"]["m"], "1/2");
        assert_eq!(v["exact"]["s"], 89);
        assert!(v["oracle"].is_null());
        assert!(v["grid_n"].is_null());
    }

    fn periodic(max: u32) -> impl Strategy<Value = SlopedSpec> {
        (1..=max, 1..=max, 1i64..300, 2i64..300).prop_filter_map("valid", |(p, qq, n, d)| {
            SlopedSpec::new(q(n, d), p, qq)
                .ok()
                .filter(|s| !s.is_singular())
        })
    }

    proptest! {
        #[test]
        fn formula_equals_parallelogram_route(s in periodic(30)) {
            let direct = covering_radius(&s.clone().into()).unwrap();
            let inscribed = parallelogram_cover_radius(&ParallelogramSpec::for_trajectory(&s));
            prop_assert_eq!(direct.cmp(&inscribed), Ordering::Equal);
        }

        #[test]
        fn formula_symmetric_in_reflected_start(s in periodic(30), shift in 0i64..30) {
            // a' with {pa'} = 1 − {pa}
            let p = s.p() as i64;
            let f = s.pa().frac_part();
            let k = shift % p;
            let a2 = (Rational::one() - f + k) / p;
            let s2 = SlopedSpec::new(a2, s.p(), s.q()).unwrap();
            prop_assert_eq!(
                covering_radius(&s.into()).unwrap(),
                covering_radius(&s2.into()).unwrap()
            );
        }

        #[test]
        fn covers_is_a_strict_threshold(s in periodic(12), num in 1i64..2000) {
            let spec: TrajectorySpec = s.into();
            let rc = covering_radius(&spec).unwrap().to_f64();
            let r = q(num, 4000);
            let c = covers(&spec, &r).unwrap();
            let rf = r.to_f64();
            if rf > rc + 1e-12 { prop_assert!(c); }
            if rf < rc - 1e-12 { prop_assert!(!c); }
            // monotone: any larger r still covers
            if c { prop_assert!(covers(&spec, &(r + q(1, 4000))).unwrap()); }
        }

        #[test]
        fn exact_radius_order_matches_floats(m1 in 1i64..100, s1 in 1u64..500, m2 in 1i64..100, s2 in 1u64..500) {
            let a = ExactRadius::new(q(m1, 7), s1);
            let b = ExactRadius::new(q(m2, 7), s2);
            let (fa, fb) = (a.to_f64(), b.to_f64());
            if (fa - fb).abs() > 1e-12 {
                prop_assert_eq!(a.cmp(&b), fa.partial_cmp(&fb).unwrap());
            }
        }
    }
}
