//! Periodic billiard trajectories in the unit square `T = [0,1]²`.
//!
//! A sloped trajectory `γ(a, p/q)` leaves `(a, 0)` in direction `(q, p)`.
//! Unfolding the square at every bounce turns it into the ray
//! `y = (p/q)(x − a)`, and [`unfold_project`] folds that ray back into `T`.
//!
//! The orbit can be produced two ways that share no code: [`simulate_orbit`]
//! traces the reflections one bounce at a time, and [`build_orbit_by_symmetry`]
//! reflects a single seed parallelogram across the `1/p × 1/q` grid.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact::{reflect_across_horizontal, reflect_across_vertical, Point, Rational, Segment};

/// Upper bound on bounces before the tracer gives up looking for recurrence.
pub const MAX_BOUNCES: usize = 1 << 24;

/// `p` and `q` are kept below this so `p² + q²` fits in a `u64`.
pub const MAX_SLOPE_COMPONENT: u32 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrajectoryError {
    #[error("starting point must satisfy 0 < a < 1 (got a = {0})")]
    StartOutOfRange(Rational),
    #[error("p and q must be positive integers below 2^31 (got p = {p}, q = {q})")]
    BadSlope { p: u32, q: u32 },
    #[error("gcd(p,q) must be 1 (got p = {p}, q = {q})")]
    NotCoprime { p: u32, q: u32 },
    #[error("singular trajectory: a = {k}/{p} (hits a corner)")]
    Singular { k: BigInt, p: u32 },
    #[error("singular trajectory: corner {corner} reached after {bounces} bounces")]
    SingularTrajectory { corner: Box<Point>, bounces: usize },
    #[error("no recurrence within {0} bounces")]
    NoRecurrence(usize),
    #[error("cell ({i}, {j}) does not contain a parallelogram")]
    NotParallelogram { i: u32, j: u32 },
    #[error("operation needs a trajectory of period at least 4")]
    PeriodTwo,
    #[error("symmetry construction failed to close: {0}")]
    Assembly(String),
}

/// `γ(a, p/q)` with validated parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SlopedSpec {
    a: Rational,
    p: u32,
    q: u32,
}

impl SlopedSpec {
    pub fn new(a: Rational, p: u32, q: u32) -> Result<Self, TrajectoryError> {
        check_start(&a)?;
        if p == 0 || q == 0 || p >= MAX_SLOPE_COMPONENT || q >= MAX_SLOPE_COMPONENT {
            return Err(TrajectoryError::BadSlope { p, q });
        }
        if p.gcd(&q) != 1 {
            return Err(TrajectoryError::NotCoprime { p, q });
        }
        Ok(SlopedSpec { a, p, q })
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `p² + q²`.
    pub fn radicand(&self) -> u64 {
        let (p, q) = (self.p as u64, self.q as u64);
        p * p + q * q
    }

    /// `p · a`; the trajectory is singular exactly when this is an integer.
    pub fn pa(&self) -> Rational {
        &self.a * self.p as i64
    }

    pub fn is_singular(&self) -> bool {
        self.pa().is_integer()
    }

    /// Index of the bottom subinterval containing `a`, `⌈p·a⌉`.
    pub fn seed_column(&self) -> u32 {
        u32::try_from(self.pa().ceil()).expect("0 < a < 1 keeps ⌈pa⌉ ≤ p")
    }

    fn ensure_periodic(&self) -> Result<(), TrajectoryError> {
        let pa = self.pa();
        if pa.is_integer() {
            return Err(TrajectoryError::Singular {
                k: pa.floor(),
                p: self.p,
            });
        }
        Ok(())
    }
}

fn check_start(a: &Rational) -> Result<(), TrajectoryError> {
    if a.is_positive() && *a < 1 {
        Ok(())
    } else {
        Err(TrajectoryError::StartOutOfRange(a.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrajectorySpec {
    Sloped(SlopedSpec),
    /// The segment `x = a`, bouncing between bottom and top.
    Vertical {
        a: Rational,
    },
    /// The segment `y = a`, bouncing between left and right.
    Horizontal {
        a: Rational,
    },
}

impl TrajectorySpec {
    pub fn sloped(a: Rational, p: u32, q: u32) -> Result<Self, TrajectoryError> {
        SlopedSpec::new(a, p, q).map(TrajectorySpec::Sloped)
    }

    pub fn vertical(a: Rational) -> Result<Self, TrajectoryError> {
        check_start(&a)?;
        Ok(TrajectorySpec::Vertical { a })
    }

    pub fn horizontal(a: Rational) -> Result<Self, TrajectoryError> {
        check_start(&a)?;
        Ok(TrajectorySpec::Horizontal { a })
    }

    pub fn as_sloped(&self) -> Option<&SlopedSpec> {
        match self {
            TrajectorySpec::Sloped(s) => Some(s),
            _ => None,
        }
    }

    pub fn ensure_periodic(&self) -> Result<(), TrajectoryError> {
        match self {
            TrajectorySpec::Sloped(s) => s.ensure_periodic(),
            _ => Ok(()),
        }
    }
}

impl From<SlopedSpec> for TrajectorySpec {
    fn from(s: SlopedSpec) -> Self {
        TrajectorySpec::Sloped(s)
    }
}

impl fmt::Display for TrajectorySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectorySpec::Sloped(s) => write!(f, "γ({}, {}/{})", s.a, s.p, s.q),
            TrajectorySpec::Vertical { a } => write!(f, "vertical x = {a}"),
            TrajectorySpec::Horizontal { a } => write!(f, "horizontal y = {a}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classification {
    Singular,
    Periodic { period: u64 },
}

pub fn classify(spec: &TrajectorySpec) -> Classification {
    match spec {
        TrajectorySpec::Sloped(s) if s.is_singular() => Classification::Singular,
        TrajectorySpec::Sloped(s) => Classification::Periodic {
            period: 2 * (s.p as u64 + s.q as u64),
        },
        TrajectorySpec::Vertical { .. } | TrajectorySpec::Horizontal { .. } => {
            Classification::Periodic { period: 2 }
        }
    }
}

/// A point of the unfolded ray `y = (p/q)(x − a)`, `y ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnfoldedPoint {
    pub x: Rational,
    pub y: Rational,
}

impl UnfoldedPoint {
    /// The ray point above abscissa `x`, if it is on the `y ≥ 0` half.
    pub fn on_ray(spec: &SlopedSpec, x: Rational) -> Option<Self> {
        let y = (&x - &spec.a) * spec.p as i64 / spec.q as i64;
        (!y.is_negative()).then_some(UnfoldedPoint { x, y })
    }

    /// The ray point at height `y ≥ 0`.
    pub fn at_height(spec: &SlopedSpec, y: Rational) -> Option<Self> {
        if y.is_negative() {
            return None;
        }
        let x = &y * spec.q as i64 / spec.p as i64 + &spec.a;
        Some(UnfoldedPoint { x, y })
    }

    pub fn project(&self) -> Point {
        unfold_project(&Point::new(self.x.clone(), self.y.clone()))
    }
}

/// Folds a point of the reflected tiling back into `T`, choosing `{x}` or
/// `1 − {x}` by the parity of `⌊x⌋` (likewise for `y`).
pub fn unfold_project(pt: &Point) -> Point {
    let fold = |v: &Rational| {
        let f = v.frac_part();
        if v.floor_is_odd() {
            Rational::one() - f
        } else {
            f
        }
    };
    Point::new(fold(&pt.x), fold(&pt.y))
}

/// Bounce coordinates along each side, each list sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BouncePoints {
    pub bottom: Vec<Rational>,
    pub top: Vec<Rational>,
    pub left: Vec<Rational>,
    pub right: Vec<Rational>,
}

impl BouncePoints {
    /// Classifies every segment endpoint lying on `∂T` by side.
    pub fn from_segments(segments: &[Segment]) -> Self {
        let mut bp = BouncePoints::default();
        let mut seen = std::collections::BTreeSet::new();
        for pt in segments.iter().flat_map(|s| [s.start(), s.end()]) {
            if !seen.insert(pt.clone()) {
                continue;
            }
            if pt.y.is_zero() {
                bp.bottom.push(pt.x.clone());
            } else if pt.y == 1 {
                bp.top.push(pt.x.clone());
            } else if pt.x.is_zero() {
                bp.left.push(pt.y.clone());
            } else if pt.x == 1 {
                bp.right.push(pt.y.clone());
            }
        }
        bp.sort();
        bp
    }

    fn sort(&mut self) {
        self.bottom.sort();
        self.top.sort();
        self.left.sort();
        self.right.sort();
    }

    pub fn total(&self) -> usize {
        self.bottom.len() + self.top.len() + self.left.len() + self.right.len()
    }
}

/// The `p` bottom bounces `π(x_k, 2k)`, `x_k = a + 2kq/p`, in order of `k`.
pub fn bounce_points_bottom(spec: &SlopedSpec) -> Result<Vec<Point>, TrajectoryError> {
    spec.ensure_periodic()?;
    Ok((0..spec.p as i64)
        .map(|k| {
            UnfoldedPoint::at_height(spec, Rational::integer(2 * k))
                .expect("nonnegative height")
                .project()
        })
        .collect())
}

/// All four sides from one period of the unfolded ray: even/odd heights give
/// bottom/top bounces, even/odd abscissae give left/right.
pub fn bounce_points(spec: &SlopedSpec) -> Result<BouncePoints, TrajectoryError> {
    spec.ensure_periodic()?;
    let (p, q) = (spec.p as i64, spec.q as i64);
    let mut bp = BouncePoints::default();
    for k in 0..p {
        for (level, side) in [(2 * k, &mut bp.bottom), (2 * k + 1, &mut bp.top)] {
            let u = UnfoldedPoint::at_height(spec, Rational::integer(level)).expect("y ≥ 0");
            side.push(u.project().x);
        }
    }
    // abscissae a < x ≤ a + 2q, i.e. x = 1, ..., 2q
    for m in 1..=2 * q {
        let u = UnfoldedPoint::on_ray(spec, Rational::integer(m)).expect("x > a");
        let side = if m % 2 == 0 {
            &mut bp.left
        } else {
            &mut bp.right
        };
        side.push(u.project().y);
    }
    bp.sort();
    Ok(bp)
}

/// Four vertices in cyclic order: on the bottom, right, top and left side of
/// the cell respectively.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Parallelogram {
    pub vertices: [Point; 4],
}

impl Parallelogram {
    pub fn edges(&self) -> [Segment; 4] {
        let v = &self.vertices;
        std::array::from_fn(|k| {
            Segment::new(v[k].clone(), v[(k + 1) % 4].clone()).expect("distinct vertices")
        })
    }

    /// Opposite sides are parallel and of equal length iff `v1 − v0 = v2 − v3`.
    pub fn is_parallelogram(&self) -> bool {
        let [a, b, c, d] = &self.vertices;
        &b.x - &a.x == &c.x - &d.x && &b.y - &a.y == &c.y - &d.y && a != b && a != d
    }

    pub fn reflect_vertical(&self, x0: &Rational) -> Parallelogram {
        let r: Vec<Point> = self
            .vertices
            .iter()
            .map(|v| reflect_across_vertical(v, x0))
            .collect();
        // right and left swap sides
        Parallelogram {
            vertices: [r[0].clone(), r[3].clone(), r[2].clone(), r[1].clone()],
        }
    }

    pub fn reflect_horizontal(&self, y0: &Rational) -> Parallelogram {
        let r: Vec<Point> = self
            .vertices
            .iter()
            .map(|v| reflect_across_horizontal(v, y0))
            .collect();
        Parallelogram {
            vertices: [r[2].clone(), r[1].clone(), r[0].clone(), r[3].clone()],
        }
    }
}

pub type Cells = BTreeMap<(u32, u32), Parallelogram>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    spec: TrajectorySpec,
    segments: Vec<Segment>,
    bounce_points: BouncePoints,
    cells: Cells,
}

impl Orbit {
    pub fn spec(&self) -> &TrajectorySpec {
        &self.spec
    }

    /// Directed segments in traversal order.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn bounce_points(&self) -> &BouncePoints {
        &self.bounce_points
    }

    /// Per-cell parallelograms; empty for period-2 orbits.
    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    pub fn period(&self) -> usize {
        self.segments.len()
    }

    /// Segments as an order-free set: each endpoint pair normalized, then sorted.
    pub fn canonical_segments(&self) -> Vec<Segment> {
        canonical_segment_set(&self.segments)
    }

    /// Total length divided by the unit step `√(p²+q²)` (1 for period 2).
    ///
    /// Every segment is a positive multiple `t·(±q, ±p)` of the direction
    /// vector, so the sum of the `t`s is an exact rational.
    pub fn length_in_steps(&self) -> Rational {
        let unit = match &self.spec {
            TrajectorySpec::Sloped(s) => s.q as i64,
            _ => 1,
        };
        self.segments
            .iter()
            .map(|s| {
                let (dx, dy) = s.delta();
                if dx.is_zero() {
                    dy.abs()
                } else {
                    dx.abs() / unit
                }
            })
            .fold(Rational::zero(), |acc, t| acc + t)
    }
}

pub fn canonical_segment_set(segments: &[Segment]) -> Vec<Segment> {
    let mut v: Vec<Segment> = segments.iter().map(Segment::canonical).collect();
    v.sort();
    v
}

#[derive(Serialize)]
struct CellJson<'a> {
    i: u32,
    j: u32,
    vertices: &'a [Point; 4],
}

impl Serialize for Orbit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let cells: Vec<CellJson> = self
            .cells
            .iter()
            .map(|(&(i, j), c)| CellJson {
                i,
                j,
                vertices: &c.vertices,
            })
            .collect();
        let mut st = serializer.serialize_struct("Orbit", 5)?;
        st.serialize_field("spec", &self.spec)?;
        st.serialize_field("period", &self.segments.len())?;
        st.serialize_field("bounce_points", &self.bounce_points)?;
        st.serialize_field("segments", &self.segments)?;
        st.serialize_field("cells", &cells)?;
        st.end()
    }
}

/// Traces the trajectory bounce by bounce until `(position, direction)`
/// recurs. The period is whatever the trace produces.
pub fn simulate_orbit(spec: &TrajectorySpec) -> Result<Orbit, TrajectoryError> {
    let (start, dir0) = match spec {
        TrajectorySpec::Sloped(s) => (
            Point::new(s.a.clone(), Rational::zero()),
            (s.q as i64, s.p as i64),
        ),
        TrajectorySpec::Vertical { a } => (Point::new(a.clone(), Rational::zero()), (0, 1)),
        TrajectorySpec::Horizontal { a } => (Point::new(Rational::zero(), a.clone()), (1, 0)),
    };

    let mut segments = Vec::new();
    let mut pos = start.clone();
    let mut dir = dir0;
    loop {
        if segments.len() >= MAX_BOUNCES {
            return Err(TrajectoryError::NoRecurrence(MAX_BOUNCES));
        }
        let time_to_wall = |coord: &Rational, d: i64| -> Option<Rational> {
            match d.signum() {
                1 => Some((Rational::one() - coord) / d),
                -1 => Some(-coord / d),
                _ => None,
            }
        };
        let tx = time_to_wall(&pos.x, dir.0);
        let ty = time_to_wall(&pos.y, dir.1);
        let t = match (&tx, &ty) {
            (Some(a), Some(b)) => a.clone().min(b.clone()),
            (Some(a), None) | (None, Some(a)) => a.clone(),
            (None, None) => unreachable!("direction is never zero"),
        };
        let next = Point::new(&pos.x + &t * dir.0, &pos.y + &t * dir.1);
        let hit_x = tx.as_ref() == Some(&t);
        let hit_y = ty.as_ref() == Some(&t);
        if hit_x && hit_y {
            return Err(TrajectoryError::SingularTrajectory {
                corner: Box::new(next),
                bounces: segments.len() + 1,
            });
        }
        segments.push(Segment::new(pos, next.clone()).expect("t > 0"));
        if hit_x {
            dir.0 = -dir.0;
        }
        if hit_y {
            dir.1 = -dir.1;
        }
        pos = next;
        if pos == start && dir == dir0 {
            break;
        }
    }

    let bounce_points = BouncePoints::from_segments(&segments);
    let mut orbit = Orbit {
        spec: spec.clone(),
        segments,
        bounce_points,
        cells: Cells::new(),
    };
    if let TrajectorySpec::Sloped(_) = spec {
        orbit.cells = cell_decomposition(&orbit)?;
    }
    Ok(orbit)
}

/// Clips every orbit segment to the grid `x = i/p`, `y = j/q` and collects the
/// pieces per cell `W_{i,j} = [(i−1)/p, i/p] × [(j−1)/q, j/q]`.
pub fn cell_decomposition(orbit: &Orbit) -> Result<Cells, TrajectoryError> {
    let s = orbit.spec.as_sloped().ok_or(TrajectoryError::PeriodTwo)?;
    let (p, q) = (s.p as i64, s.q as i64);

    let mut pieces: BTreeMap<(u32, u32), Vec<Segment>> = BTreeMap::new();
    for seg in &orbit.segments {
        let (dx, dy) = seg.delta();
        let (x0, y0) = (&seg.start().x, &seg.start().y);
        let mut ts = vec![Rational::zero(), Rational::one()];
        for i in 1..p {
            let t = (Rational::frac(i, p) - x0) / &dx;
            if t.is_positive() && t < 1 {
                ts.push(t);
            }
        }
        for j in 1..q {
            let t = (Rational::frac(j, q) - y0) / &dy;
            if t.is_positive() && t < 1 {
                ts.push(t);
            }
        }
        ts.sort();
        ts.dedup();
        let at = |t: &Rational| Point::new(x0 + t * &dx, y0 + t * &dy);
        for w in ts.windows(2) {
            let (a, b) = (at(&w[0]), at(&w[1]));
            let mid = a.midpoint(&b);
            let i = u32::try_from((&mid.x * p).floor()).expect("inside T") + 1;
            let j = u32::try_from((&mid.y * q).floor()).expect("inside T") + 1;
            pieces
                .entry((i, j))
                .or_default()
                .push(Segment::new(a, b).expect("distinct breakpoints"));
        }
    }

    let mut cells = Cells::new();
    for i in 1..=s.p {
        for j in 1..=s.q {
            let cell_pieces = pieces
                .remove(&(i, j))
                .ok_or(TrajectoryError::NotParallelogram { i, j })?;
            let para = parallelogram_from_pieces(i, j, p, q, &cell_pieces)?;
            cells.insert((i, j), para);
        }
    }
    Ok(cells)
}

fn parallelogram_from_pieces(
    i: u32,
    j: u32,
    p: i64,
    q: i64,
    pieces: &[Segment],
) -> Result<Parallelogram, TrajectoryError> {
    let bad = || TrajectoryError::NotParallelogram { i, j };
    if pieces.len() != 4 {
        return Err(bad());
    }
    let left = Rational::frac(i as i64 - 1, p);
    let right = Rational::frac(i as i64, p);
    let bottom = Rational::frac(j as i64 - 1, q);
    let top = Rational::frac(j as i64, q);

    let mut sides: [Option<Point>; 4] = Default::default();
    for v in pieces.iter().flat_map(|s| [s.start(), s.end()]) {
        let slot = if v.y == bottom {
            0
        } else if v.x == right {
            1
        } else if v.y == top {
            2
        } else if v.x == left {
            3
        } else {
            return Err(bad());
        };
        match &sides[slot] {
            Some(existing) if existing != v => return Err(bad()),
            _ => sides[slot] = Some(v.clone()),
        }
    }
    let [Some(b), Some(r), Some(t), Some(l)] = sides else {
        return Err(bad());
    };
    let para = Parallelogram {
        vertices: [b, r, t, l],
    };
    let mut want: Vec<Segment> = para.edges().iter().map(Segment::canonical).collect();
    let mut got: Vec<Segment> = pieces.iter().map(Segment::canonical).collect();
    want.sort();
    got.sort();
    if want != got || !para.is_parallelogram() {
        return Err(bad());
    }
    Ok(para)
}

/// Builds the orbit from the seed parallelogram in `W_{⌈pa⌉,1}` by reflecting
/// it across every grid line, then merges the cell edges into maximal
/// segments and walks them from `(a, 0)` to recover traversal order.
pub fn build_orbit_by_symmetry(spec: &SlopedSpec) -> Result<Orbit, TrajectoryError> {
    spec.ensure_periodic()?;
    let (p, q) = (spec.p as i64, spec.q as i64);
    let slope = Rational::frac(p, q);
    let i0 = spec.seed_column();

    let base = Point::new(spec.a.clone(), Rational::zero());
    let right_x = Rational::frac(i0 as i64, p);
    let left_x = Rational::frac(i0 as i64 - 1, p);
    let right = Point::new(right_x.clone(), (&right_x - &spec.a) * &slope);
    let left = Point::new(left_x.clone(), (&spec.a - &left_x) * &slope);
    let apex = Point::new(&right.x + &left.x - &base.x, &right.y + &left.y - &base.y);
    let seed = Parallelogram {
        vertices: [base.clone(), right, apex, left],
    };

    let mut cells = Cells::new();
    let mut bottom_row: BTreeMap<u32, Parallelogram> = BTreeMap::new();
    bottom_row.insert(i0, seed.clone());
    let mut cur = seed.clone();
    for i in i0 + 1..=spec.p {
        cur = cur.reflect_vertical(&Rational::frac(i as i64 - 1, p));
        bottom_row.insert(i, cur.clone());
    }
    cur = seed;
    for i in (1..i0).rev() {
        cur = cur.reflect_vertical(&Rational::frac(i as i64, p));
        bottom_row.insert(i, cur.clone());
    }
    for (i, first) in bottom_row {
        let mut cur = first;
        cells.insert((i, 1), cur.clone());
        for j in 2..=spec.q {
            cur = cur.reflect_horizontal(&Rational::frac(j as i64 - 1, q));
            cells.insert((i, j), cur.clone());
        }
    }

    let maximal = merge_collinear(cells.values().flat_map(|c| c.edges()));
    let segments = chain_from(&base, (q, p), maximal)?;
    let bounce_points = BouncePoints::from_segments(&segments);
    Ok(Orbit {
        spec: TrajectorySpec::Sloped(spec.clone()),
        segments,
        bounce_points,
        cells,
    })
}

/// Joins pieces lying on a common line whose endpoints touch.
fn merge_collinear(pieces: impl IntoIterator<Item = Segment>) -> Vec<Segment> {
    // key: (slope, intercept) of the supporting line
    let mut by_line: BTreeMap<(Rational, Rational), Vec<Segment>> = BTreeMap::new();
    for piece in pieces {
        let piece = piece.canonical();
        let slope = piece.slope().expect("orbit pieces are never vertical here");
        let intercept = &piece.start().y - &slope * &piece.start().x;
        by_line.entry((slope, intercept)).or_default().push(piece);
    }
    let mut out = Vec::new();
    for (_, mut group) in by_line {
        group.sort();
        group.dedup();
        let mut iter = group.into_iter();
        let mut acc = iter.next().expect("nonempty group");
        for next in iter {
            if next.start() == acc.end() {
                acc = Segment::new(acc.start().clone(), next.end().clone()).expect("extends");
            } else {
                out.push(acc);
                acc = next;
            }
        }
        out.push(acc);
    }
    out
}

/// Orders undirected segments into a closed walk starting at `start`, leaving
/// it along `initial_dir`.
fn chain_from(
    start: &Point,
    initial_dir: (i64, i64),
    segments: Vec<Segment>,
) -> Result<Vec<Segment>, TrajectoryError> {
    let mut incident: HashMap<Point, Vec<usize>> = HashMap::new();
    for (k, s) in segments.iter().enumerate() {
        incident.entry(s.start().clone()).or_default().push(k);
        incident.entry(s.end().clone()).or_default().push(k);
    }
    let oriented_from = |k: usize, from: &Point| -> Segment {
        let s = &segments[k];
        if s.start() == from {
            s.clone()
        } else {
            s.reversed()
        }
    };

    let first = incident
        .get(start)
        .into_iter()
        .flatten()
        .copied()
        .find(|&k| {
            let (dx, dy) = oriented_from(k, start).delta();
            dx.is_positive() == (initial_dir.0 > 0)
                && dy.is_positive() == (initial_dir.1 > 0)
                && &dx * initial_dir.1 == &dy * initial_dir.0
        })
        .ok_or_else(|| TrajectoryError::Assembly(format!("no segment leaves {start}")))?;

    let mut used = vec![false; segments.len()];
    let mut walk = Vec::with_capacity(segments.len());
    let mut k = first;
    let mut at = start.clone();
    loop {
        if used[k] {
            return Err(TrajectoryError::Assembly("segment revisited".into()));
        }
        used[k] = true;
        let seg = oriented_from(k, &at);
        at = seg.end().clone();
        walk.push(seg);
        let others: Vec<usize> = incident[&at].iter().copied().filter(|&n| n != k).collect();
        let [next] = others[..] else {
            return Err(TrajectoryError::Assembly(format!(
                "{} continuations at {at}",
                others.len()
            )));
        };
        if next == first && at == *start {
            break;
        }
        k = next;
    }
    if used.iter().any(|u| !u) {
        return Err(TrajectoryError::Assembly(format!(
            "{} segments not on the walk",
            used.iter().filter(|u| !**u).count()
        )));
    }
    Ok(walk)
}
