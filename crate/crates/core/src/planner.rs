//! Shortest periodic covering paths for a fixed blade radius.
//!
//! A class `p² + q² = M` reaches covering radius `1/(2√M)` at best, with path
//! length `2√M`. So for radius `r` the shortest covering path comes from the
//! least `M > 1/(4r²)` that is a sum of two coprime squares, and the pair
//! `(p, q)` comes from Cornacchia's descent.

use num_integer::{Integer, Roots};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::covering::{class_min_radius, midpoint_starts, ExactRadius};
use crate::exact::Rational;
use crate::trajectory::{SlopedSpec, TrajectoryError, TrajectorySpec, MAX_SLOPE_COMPONENT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("radius must be positive (got r = {0})")]
    InvalidRadius(Rational),
    #[error("radius {0} is too small to plan for")]
    RadiusTooSmall(Rational),
    #[error("{0} is not a sum of two coprime squares")]
    NotRepresentable(u64),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Trial-division factorization, primes ascending.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            let mut e = 0;
            while m.is_multiple_of(d) {
                m /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// `M = p² + q²` with `gcd(p, q) = 1` is solvable iff `4 ∤ M` and no prime
/// `≡ 3 (mod 4)` divides `M`.
pub fn is_properly_representable(m: u64) -> bool {
    if m == 0 || m.is_multiple_of(4) {
        return false;
    }
    factorize(m).iter().all(|&(p, _)| p % 4 != 3)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    (g.gcd == 1).then(|| g.x.rem_euclid(m as i128) as u64)
}

/// A square root of −1 modulo a prime `p ≡ 1 (mod 4)`: `b^((p−1)/4)` for
/// the first base `b` that works (any non-residue does).
fn sqrt_minus_one_prime(p: u64) -> u64 {
    (2..p)
        .map(|b| pow_mod(b, (p - 1) / 4, p))
        .find(|&c| mul_mod(c, c, p) == p - 1)
        .expect("p ≡ 1 (mod 4) has a non-residue")
}

/// Hensel-lifts a root of `t² + 1` from `p` to `p^e`.
fn lift(mut t: u64, p: u64, e: u32) -> u64 {
    let mut m = p;
    for _ in 1..e {
        m *= p;
        let f = (mul_mod(t, t, m) + 1) % m;
        let inv = inv_mod(mul_mod(2, t, m), m).expect("2t is a unit mod odd prime power");
        t = (t + m - mul_mod(f, inv, m)) % m;
    }
    t
}

/// Every `t ∈ [0, M)` with `t² ≡ −1 (mod M)`, ascending. Empty when none exist.
pub fn sqrt_minus_one_roots(m: u64) -> Vec<u64> {
    if m < 2 || !is_properly_representable(m) {
        return Vec::new();
    }
    // (residues, modulus) accumulated by CRT over prime powers
    let mut acc: (Vec<u64>, u64) = (vec![0], 1);
    for (p, e) in factorize(m) {
        let (local, pe): (Vec<u64>, u64) = if p == 2 {
            (vec![1], 2)
        } else {
            let pe = p.pow(e);
            let t = lift(sqrt_minus_one_prime(p), p, e);
            (vec![t, pe - t], pe)
        };
        let (prev, m0) = acc;
        let inv = inv_mod(m0 % pe, pe).expect("coprime moduli");
        let joint = m0 * pe;
        let mut next = Vec::with_capacity(prev.len() * local.len());
        for &r0 in &prev {
            for &r1 in &local {
                // x = r0 + m0·k with x ≡ r1 (mod pe)
                let k = mul_mod((r1 + pe - r0 % pe) % pe, inv, pe);
                next.push((r0 + (m0 as u128 * k as u128) as u64) % joint);
            }
        }
        acc = (next, joint);
    }
    let mut roots = acc.0;
    roots.sort_unstable();
    roots.dedup();
    roots
}

/// Euclidean descent on `(M, t)` until the remainder drops to `√M` or below.
fn descend(m: u64, t: u64) -> Option<(u64, u64)> {
    let (mut a, mut b) = (m, t);
    while (b as u128) * (b as u128) > m as u128 {
        (a, b) = (b, a % b);
    }
    let rest = m - b * b;
    let y = rest.sqrt();
    (y * y == rest).then_some((b, y))
}

fn normalized(x: u64, y: u64) -> (u64, u64) {
    (x.min(y), x.max(y))
}

/// One coprime pair `p ≤ q` with `p² + q² = M`.
pub fn cornacchia(m: u64) -> Result<(u64, u64), PlannerError> {
    let t = *sqrt_minus_one_roots(m)
        .first()
        .ok_or(PlannerError::NotRepresentable(m))?;
    let (x, y) = descend(m, t).ok_or(PlannerError::NotRepresentable(m))?;
    let (p, q) = normalized(x, y);
    assert!(
        p * p + q * q == m && p.gcd(&q) == 1 && p > 0,
        "descent produced an invalid representation of {m}"
    );
    Ok((p, q))
}

/// All coprime pairs `1 ≤ p ≤ q` with `p² + q² = M`, one descent per root of −1.
pub fn all_primitive_representations(m: u64) -> Vec<(u64, u64)> {
    let mut reps: Vec<(u64, u64)> = sqrt_minus_one_roots(m)
        .into_iter()
        .filter_map(|t| descend(m, t))
        .map(|(x, y)| normalized(x, y))
        .filter(|&(p, q)| p > 0 && p.gcd(&q) == 1)
        .collect();
    reps.sort_unstable();
    reps.dedup();
    reps
}

/// Exhaustive search over `1 ≤ p ≤ q`, `p² + q² = M`, `gcd = 1`.
pub fn representations_by_search(m: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut p = 1u64;
    while 2 * p * p <= m {
        let rest = m - p * p;
        let q = rest.sqrt();
        if q * q == rest && p.gcd(&q) == 1 {
            out.push((p, q));
        }
        p += 1;
    }
    out
}

/// `coeff · √radicand`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExactLength {
    pub coeff: u64,
    pub radicand: u64,
}

impl ExactLength {
    pub fn to_f64(&self) -> f64 {
        self.coeff as f64 * (self.radicand as f64).sqrt()
    }
}

impl std::fmt::Display for ExactLength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}√{}", self.coeff, self.radicand)
    }
}

impl Serialize for ExactLength {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ExactLength", 3)?;
        st.serialize_field("coeff", &self.coeff)?;
        st.serialize_field("radicand", &self.radicand)?;
        st.serialize_field("float", &self.to_f64())?;
        st.end()
    }
}

/// Length of one primitive traversal: the unfolded ray runs from `(a, 0)` to
/// `(a + 2q, 2p)`.
pub fn path_length(spec: &TrajectorySpec) -> Result<ExactLength, TrajectoryError> {
    spec.ensure_periodic()?;
    Ok(match spec {
        TrajectorySpec::Sloped(s) => ExactLength {
            coeff: 2,
            radicand: s.radicand(),
        },
        _ => ExactLength {
            coeff: 2,
            radicand: 1,
        },
    })
}

/// Trajectories of period `N = 2(p + q)` with `p` bottom bounces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrajectoryClass {
    pub period: u64,
    pub p: u32,
    pub q: u32,
}

impl TrajectoryClass {
    pub fn new(p: u32, q: u32) -> Result<Self, TrajectoryError> {
        // validates coprimality and range
        SlopedSpec::new(Rational::frac(1, 2 * p.max(1) as i64), p, q)?;
        Ok(TrajectoryClass {
            period: 2 * (p as u64 + q as u64),
            p,
            q,
        })
    }

    pub fn min_radius(&self) -> ExactRadius {
        class_min_radius(self.p, self.q)
            .expect("validated on construction")
            .radius
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub r: Rational,
    /// `1/(4r²)`.
    pub threshold: Rational,
    pub m: u64,
    pub representations: Vec<(u32, u32)>,
    pub canonical_spec: TrajectorySpec,
    pub all_min_starts: Vec<Rational>,
    pub path_length: ExactLength,
    /// For `r > 1/2` the vertical mid-line (length 2, radius 1/2) also covers.
    pub period_two_alternative: Option<TrajectorySpec>,
}

impl Plan {
    pub fn covering_radius(&self) -> ExactRadius {
        ExactRadius::new(Rational::frac(1, 2), self.m)
    }
}

impl Serialize for Plan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let reps: Vec<[u32; 2]> = self.representations.iter().map(|&(p, q)| [p, q]).collect();
        let mut st = serializer.serialize_struct("Plan", 8)?;
        st.serialize_field("r", &self.r)?;
        st.serialize_field("threshold", &self.threshold)?;
        st.serialize_field("M", &self.m)?;
        st.serialize_field("reps", &reps)?;
        st.serialize_field("canonical", &self.canonical_spec)?;
        st.serialize_field("starts", &self.all_min_starts)?;
        st.serialize_field("length", &self.path_length)?;
        st.serialize_field("period_two_alternative", &self.period_two_alternative)?;
        st.end()
    }
}

/// Largest `M` the planner will consider, so that `p, q < 2^31`.
const MAX_PLAN_M: u64 = 1 << 61;

pub fn plan_shortest_cover(r: &Rational) -> Result<Plan, PlannerError> {
    if !r.is_positive() {
        return Err(PlannerError::InvalidRadius(r.clone()));
    }
    let four_r_sq = r.square() * 4;
    let threshold = four_r_sq.recip();
    // strictly greater than the threshold; M = 1 would be a period-2 path
    let first = u64::try_from(threshold.floor() + 1u32)
        .ok()
        .filter(|&m| m < MAX_PLAN_M)
        .ok_or_else(|| PlannerError::RadiusTooSmall(r.clone()))?
        .max(2);

    let mut m = first;
    while !is_properly_representable(m) {
        m += 1;
        if m >= MAX_PLAN_M {
            return Err(PlannerError::RadiusTooSmall(r.clone()));
        }
    }
    debug_assert!(&four_r_sq * Rational::from(m) > 1);

    let representations: Vec<(u32, u32)> = all_primitive_representations(m)
        .into_iter()
        .map(|(p, q)| (p as u32, q as u32))
        .collect();
    let &(p, q) = representations
        .first()
        .ok_or(PlannerError::NotRepresentable(m))?;
    debug_assert!(p < MAX_SLOPE_COMPONENT && q < MAX_SLOPE_COMPONENT);
    let canonical_spec = TrajectorySpec::sloped(Rational::frac(1, 2 * p as i64), p, q)?;

    let period_two_alternative = if *r > Rational::frac(1, 2) {
        Some(TrajectorySpec::vertical(Rational::frac(1, 2))?)
    } else {
        None
    };

    Ok(Plan {
        r: r.clone(),
        threshold,
        m,
        representations,
        path_length: path_length(&canonical_spec)?,
        canonical_spec,
        all_min_starts: midpoint_starts(p),
        period_two_alternative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{covering_radius, covers};
    use crate::trajectory::simulate_orbit;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn representability_examples() {
        assert!(is_properly_representable(2));
        assert!(!is_properly_representable(9));
        assert!(representations_by_search(9).is_empty());
        assert!(!is_properly_representable(4));
        assert!(is_properly_representable(1));
        assert!(!is_properly_representable(0));
    }

    #[test]
    fn cornacchia_examples() {
        assert_eq!(cornacchia(2), Ok((1, 1)));
        assert_eq!(cornacchia(26), Ok((1, 5)));
        assert_eq!(cornacchia(89), Ok((5, 8)));
        assert_eq!(cornacchia(3), Err(PlannerError::NotRepresentable(3)));
        assert_eq!(cornacchia(1), Err(PlannerError::NotRepresentable(1)));
    }

    #[test]
    fn all_representation_examples() {
        assert_eq!(all_primitive_representations(25), vec![(3, 4)]);
        assert_eq!(all_primitive_representations(65), vec![(1, 8), (4, 7)]);
        assert!(all_primitive_representations(3).is_empty());
        // 5·13·17 has four essentially different representations
        assert_eq!(
            all_primitive_representations(1105),
            representations_by_search(1105)
        );
        assert_eq!(all_primitive_representations(1105).len(), 4);
    }

    #[test]
    fn roots_of_minus_one() {
        for m in [2u64, 5, 10, 25, 65, 125, 130, 1105, 2 * 5u64.pow(4) * 13] {
            let roots = sqrt_minus_one_roots(m);
            let brute: Vec<u64> = (0..m).filter(|t| (t * t + 1) % m == 0).collect();
            assert_eq!(roots, brute, "M = {m}");
        }
    }

    #[test]
    fn plan_examples() {
        let plan = plan_shortest_cover(&q(1, 10)).unwrap();
        assert_eq!(plan.threshold, q(25, 1));
        assert_eq!(plan.m, 26);
        assert_eq!(plan.representations, vec![(1, 5)]);
        assert_eq!(
            plan.path_length,
            ExactLength {
                coeff: 2,
                radicand: 26
            }
        );
        assert!((plan.path_length.to_f64() - 10.198).abs() < 1e-3);
        assert_eq!(
            plan.canonical_spec,
            TrajectorySpec::sloped(q(1, 2), 1, 5).unwrap()
        );
        assert_eq!(plan.all_min_starts, vec![q(1, 2)]);
        assert!(plan.period_two_alternative.is_none());

        let plan = plan_shortest_cover(&q(1, 2)).unwrap();
        assert_eq!(plan.threshold, q(1, 1));
        assert_eq!(plan.m, 2);
        assert_eq!(plan.representations, vec![(1, 1)]);
        assert_eq!(plan.path_length.to_string(), "2√2");
        assert!(plan.period_two_alternative.is_none());

        let plan = plan_shortest_cover(&q(3, 4)).unwrap();
        assert_eq!(plan.m, 2);
        assert_eq!(
            plan.period_two_alternative,
            Some(TrajectorySpec::vertical(q(1, 2)).unwrap())
        );

        assert_eq!(
            plan_shortest_cover(&q(0, 1)),
            Err(PlannerError::InvalidRadius(q(0, 1)))
        );
        assert!(matches!(
            plan_shortest_cover(&q(-1, 3)),
            Err(PlannerError::InvalidRadius(_))
        ));
    }

    #[test]
    fn plan_json_shape() {
        let v = serde_json::to_value(plan_shortest_cover(&q(1, 10)).unwrap()).unwrap();
        assert_eq!(v["r"], "1/10");
        assert_eq!(v["threshold"], "25/1");
        assert_eq!(v["M"], 26);
        assert_eq!(v["reps"], serde_json::json!([[1, 5]]));
        assert_eq!(v["canonical"]["kind"], "sloped");
        assert_eq!(v["starts"], serde_json::json!(["1/2"]));
        assert_eq!(v["length"]["coeff"], 2);
        assert_eq!(v["length"]["radicand"], 26);
        assert!((v["length"]["float"].as_f64().unwrap() - 10.198039).abs() < 1e-6);
    }

    #[test]
    fn path_length_examples() {
        let s = TrajectorySpec::sloped(q(1, 16), 8, 5).unwrap();
        assert_eq!(
            path_length(&s).unwrap(),
            ExactLength {
                coeff: 2,
                radicand: 89
            }
        );
        let orbit = simulate_orbit(&s).unwrap();
        let summed: f64 = orbit
            .segments()
            .iter()
            .map(|seg| seg.length_sq().to_f64().sqrt())
            .sum();
        assert!((summed - 2.0 * 89f64.sqrt()).abs() < 1e-12);
        assert_eq!(orbit.length_in_steps(), q(2, 1));

        let d = TrajectorySpec::sloped(q(1, 4), 1, 1).unwrap();
        assert_eq!(path_length(&d).unwrap().to_string(), "2√2");
        let v = TrajectorySpec::vertical(q(1, 5)).unwrap();
        assert_eq!(path_length(&v).unwrap().to_f64(), 2.0);
        let sing = TrajectorySpec::sloped(q(1, 2), 2, 1).unwrap();
        assert!(path_length(&sing).is_err());
    }

    #[test]
    fn trajectory_class() {
        let c = TrajectoryClass::new(8, 5).unwrap();
        assert_eq!(c.period, 26);
        assert_eq!(c.min_radius(), ExactRadius::new(q(1, 2), 89));
        assert!(TrajectoryClass::new(2, 4).is_err());
    }

    #[test]
    fn representability_matches_search_small() {
        for m in 1..=5000u64 {
            let search = representations_by_search(m);
            // M = 1 is 1² + 0², outside the p ≥ 1 search
            let expected = m == 1 || !search.is_empty();
            assert_eq!(is_properly_representable(m), expected, "M = {m}");
            if m >= 2 {
                assert_eq!(all_primitive_representations(m), search, "M = {m}");
            }
        }
    }

    proptest! {
        #[test]
        fn plan_is_monotone_and_covers(n1 in 1i64..400, n2 in 1i64..400, d in 1i64..200) {
            let (r1, r2) = (q(n1.min(n2), 20 * d), q(n1.max(n2), 20 * d));
            let (p1, p2) = (plan_shortest_cover(&r1).unwrap(), plan_shortest_cover(&r2).unwrap());
            prop_assert!(p1.m >= p2.m);
            for plan in [&p1, &p2] {
                let rc = covering_radius(&plan.canonical_spec).unwrap();
                prop_assert_eq!(&rc, &plan.covering_radius());
                // rcov ≤ r, and strictly covers unless rcov = r exactly
                prop_assert!(rc.squared() <= plan.r.square());
                prop_assert!(covers(&plan.canonical_spec, &plan.r).unwrap());
            }
        }

        #[test]
        fn cornacchia_output_is_valid(m in 2u64..2_000_000) {
            match cornacchia(m) {
                Ok((p, q)) => {
                    prop_assert!(is_properly_representable(m));
                    prop_assert_eq!(p * p + q * q, m);
                    prop_assert_eq!(p.gcd(&q), 1);
                }
                Err(_) => prop_assert!(!is_properly_representable(m)),
            }
        }
    }
}
