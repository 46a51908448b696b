//! Compact sets bounded by circles, ellipses, polygons and segment/arc chains.
//!
//! A [`Scene`] is a finite list of pairwise-disjoint closed shapes. Each shape
//! boundary is a positively oriented Jordan curve made of analytic pieces;
//! [`arcs`] exposes those pieces as parametrized curves on `[0, 1]` and
//! [`corners`] reports the points where two pieces meet at an angle.
//!
//! Corner angles are measured on the side of the complement: a corner with
//! interior angle `θ` has `omega_angle = 2π − θ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::special::ellipse_perimeter;

pub type Point = Complex64;

/// Turning angles below this are treated as smooth junctions.
const SMOOTH_TURN: f64 = 1e-9;
/// Relative tolerance for piece endpoints to be considered joined.
const JOIN_TOL: f64 = 1e-9;
/// Polyline resolution used for validation of curved boundaries.
const SAMPLES_PER_PIECE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Label {
    #[default]
    E,
    F,
}

/// One analytic piece of an [`Shape::ArcChain`] boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Segment {
        start: Point,
        end: Point,
    },
    /// Circular arc traversed from `theta_start` to `theta_end`
    /// (counterclockwise when `theta_end > theta_start`).
    Arc {
        center: Point,
        radius: f64,
        theta_start: f64,
        theta_end: f64,
    },
}

impl Piece {
    fn curve(&self) -> Curve {
        match *self {
            Piece::Segment { start, end } => Curve::Segment { start, end },
            Piece::Arc {
                center,
                radius,
                theta_start,
                theta_end,
            } => Curve::CircularArc {
                center,
                radius,
                theta_start,
                theta_end,
            },
        }
    }

    pub fn start(&self) -> Point {
        self.curve().point(0.0)
    }

    pub fn end(&self) -> Point {
        self.curve().point(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk {
        center: Point,
        radius: f64,
    },
    Ellipse {
        center: Point,
        semi_major: f64,
        semi_minor: f64,
        rotation: f64,
    },
    /// Vertices in counterclockwise order.
    Polygon {
        vertices: Vec<Point>,
    },
    /// Closed chain of segments and circular arcs, counterclockwise.
    ArcChain {
        pieces: Vec<Piece>,
    },
}

/// A boundary point where two analytic pieces meet at an angle other than π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub location: Point,
    /// Angle of the sector occupied by the complement, in `(0, 2π)`.
    pub omega_angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub shapes: Vec<Shape>,
    pub labels: Vec<Label>,
}

impl Scene {
    /// Scene with every shape labelled `E`.
    pub fn new(shapes: Vec<Shape>) -> Self {
        let labels = vec![Label::E; shapes.len()];
        Scene { shapes, labels }
    }

    pub fn with_labels(shapes: Vec<Shape>, labels: Vec<Label>) -> Result<Self> {
        if shapes.len() != labels.len() {
            return Err(Error::Config(format!(
                "{} shapes but {} labels",
                shapes.len(),
                labels.len()
            )));
        }
        Ok(Scene { shapes, labels })
    }

    /// Union of equal-radius disks centered at `centers`.
    pub fn disks(centers: &[Point], radius: f64) -> Self {
        Scene::new(
            centers
                .iter()
                .map(|&center| Shape::Disk { center, radius })
                .collect(),
        )
    }

    /// Sub-scene made of the shapes carrying `label`.
    pub fn labelled(&self, label: Label) -> Scene {
        let (shapes, labels) = self
            .shapes
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == label)
            .map(|(s, &l)| (s.clone(), l))
            .unzip();
        Scene { shapes, labels }
    }
}

/// Outcome of [`validate_scene`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneCheck {
    /// Smallest distance between two distinct shapes (`+∞` for one shape).
    /// Exact for disk pairs, polyline-approximated otherwise.
    pub min_gap: f64,
}

/// The geometric carrier of a [`ParametricArc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Segment {
        start: Point,
        end: Point,
    },
    CircularArc {
        center: Point,
        radius: f64,
        theta_start: f64,
        theta_end: f64,
    },
    /// Full ellipse, traversed counterclockwise starting at the end of the major axis.
    Ellipse {
        center: Point,
        semi_major: f64,
        semi_minor: f64,
        rotation: f64,
    },
}

impl Curve {
    pub fn point(&self, t: f64) -> Point {
        match *self {
            Curve::Segment { start, end } => start + (end - start) * t,
            Curve::CircularArc {
                center,
                radius,
                theta_start,
                theta_end,
            } => {
                center + Complex64::from_polar(radius, theta_start + t * (theta_end - theta_start))
            }
            Curve::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => {
                let (s, c) = (TAU * t).sin_cos();
                center
                    + Complex64::from_polar(1.0, rotation)
                        * Complex64::new(semi_major * c, semi_minor * s)
            }
        }
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        match *self {
            Curve::Segment { start, end } => end - start,
            Curve::CircularArc {
                radius,
                theta_start,
                theta_end,
                ..
            } => {
                let sweep = theta_end - theta_start;
                Complex64::i() * sweep * Complex64::from_polar(radius, theta_start + t * sweep)
            }
            Curve::Ellipse {
                semi_major,
                semi_minor,
                rotation,
                ..
            } => {
                let (s, c) = (TAU * t).sin_cos();
                Complex64::from_polar(TAU, rotation)
                    * Complex64::new(-semi_major * s, semi_minor * c)
            }
        }
    }

    /// `point(t) − point(0)` without cancellation for small `t`.
    fn offset_from_start(&self, t: f64) -> Complex64 {
        match *self {
            Curve::Segment { start, end } => (end - start) * t,
            Curve::CircularArc {
                radius,
                theta_start,
                theta_end,
                ..
            } => {
                Complex64::from_polar(radius, theta_start) * expm1_i(t * (theta_end - theta_start))
            }
            Curve::Ellipse { .. } => self.point(t) - self.point(0.0),
        }
    }

    /// `point(1 − r) − point(1)` without cancellation for small `r`.
    fn offset_from_end(&self, r: f64) -> Complex64 {
        match *self {
            Curve::Segment { start, end } => (start - end) * r,
            Curve::CircularArc {
                radius,
                theta_start,
                theta_end,
                ..
            } => Complex64::from_polar(radius, theta_end) * expm1_i(-r * (theta_end - theta_start)),
            Curve::Ellipse { .. } => self.point(1.0 - r) - self.point(1.0),
        }
    }

    /// Closed-form arc length.
    pub fn length(&self) -> f64 {
        match *self {
            Curve::Segment { start, end } => (end - start).norm(),
            Curve::CircularArc {
                radius,
                theta_start,
                theta_end,
                ..
            } => radius * (theta_end - theta_start).abs(),
            Curve::Ellipse {
                semi_major,
                semi_minor,
                ..
            } => ellipse_perimeter(semi_major, semi_minor),
        }
    }
}

/// One analytic piece of a shape boundary parametrized over `[0, 1]`.
///
/// The singular flags mark endpoints that are corners; quadrature grades its
/// sampling towards them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricArc {
    pub curve: Curve,
    pub singular_start: bool,
    pub singular_end: bool,
}

impl ParametricArc {
    fn smooth(curve: Curve) -> Self {
        ParametricArc {
            curve,
            singular_start: false,
            singular_end: false,
        }
    }

    pub fn point(&self, t: f64) -> Point {
        self.curve.point(t)
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        self.curve.derivative(t)
    }

    pub fn length(&self) -> f64 {
        self.curve.length()
    }
}

/// `e^{ix} − 1`
fn expm1_i(x: f64) -> Complex64 {
    Complex64::i() * Complex64::from_polar(2.0 * (0.5 * x).sin(), 0.5 * x)
}

/// A point of an arc with its offset from the nearer endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPoint {
    pub z: Point,
    pub endpoint: Point,
    /// `z − endpoint`, accurate even when it is far below the rounding error of `z`.
    pub offset: Complex64,
}

impl ParametricArc {
    /// The point at `t`, given both `t` and `r = 1 − t` so that neither is
    /// formed by cancellation.
    pub fn arc_point(&self, t: f64, r: f64) -> ArcPoint {
        let z = self.point(t);
        if t <= r {
            ArcPoint {
                z,
                endpoint: self.point(0.0),
                offset: self.curve.offset_from_start(t),
            }
        } else {
            ArcPoint {
                z,
                endpoint: self.point(1.0),
                offset: self.curve.offset_from_end(r),
            }
        }
    }
}

fn finite(z: Point) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Signed turning angle from direction `incoming` to direction `outgoing`.
fn turn(incoming: Complex64, outgoing: Complex64) -> f64 {
    (outgoing / incoming).arg()
}

impl Shape {
    /// Rough size used for relative tolerances.
    fn scale(&self) -> f64 {
        match self {
            Shape::Disk { radius, .. } => *radius,
            Shape::Ellipse {
                semi_major,
                semi_minor,
                ..
            } => semi_major.max(*semi_minor),
            Shape::Polygon { vertices } => bounding_diameter(vertices),
            Shape::ArcChain { .. } => bounding_diameter(&self.polyline(16)),
        }
    }

    /// Checks that the shape is a nondegenerate, positively oriented Jordan curve.
    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Disk { center, radius } => {
                if !finite(*center) || !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::DegenerateShape(format!(
                        "disk at {center} needs a positive finite radius, got {radius}"
                    )));
                }
            }
            Shape::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => {
                let ok = finite(*center)
                    && semi_major.is_finite()
                    && semi_minor.is_finite()
                    && rotation.is_finite()
                    && *semi_major > 0.0
                    && *semi_minor > 0.0;
                if !ok {
                    return Err(Error::DegenerateShape(format!(
                        "ellipse at {center} needs positive finite semi-axes"
                    )));
                }
            }
            Shape::Polygon { vertices } => validate_polygon(vertices)?,
            Shape::ArcChain { pieces } => validate_arc_chain(pieces)?,
        }
        Ok(())
    }

    /// Dense closed polyline approximating the boundary (first point not repeated).
    pub fn polyline(&self, per_piece: usize) -> Vec<Point> {
        match self {
            Shape::Polygon { vertices } => vertices.clone(),
            _ => {
                let mut pts = Vec::new();
                for arc in arcs(self) {
                    let n = match arc.curve {
                        Curve::Segment { .. } => 1,
                        _ => per_piece.max(8),
                    };
                    pts.extend((0..n).map(|i| arc.point(i as f64 / n as f64)));
                }
                pts
            }
        }
    }

    /// Whether `z` lies strictly inside the shape (polyline approximation for arc chains).
    pub fn contains(&self, z: Point) -> bool {
        match self {
            Shape::Disk { center, radius } => (z - center).norm() < *radius,
            Shape::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => {
                let w = (z - center) * Complex64::from_polar(1.0, -rotation);
                (w.re / semi_major).powi(2) + (w.im / semi_minor).powi(2) < 1.0
            }
            Shape::Polygon { vertices } => point_in_polygon(vertices, z),
            Shape::ArcChain { .. } => point_in_polygon(&self.polyline(4 * SAMPLES_PER_PIECE), z),
        }
    }

    /// Image of the shape under `z ↦ a·z + b` (`a ≠ 0`).
    pub fn transformed(&self, a: Complex64, b: Complex64) -> Shape {
        let map = |z: Point| a * z + b;
        let (scale, angle) = (a.norm(), a.arg());
        match self {
            Shape::Disk { center, radius } => Shape::Disk {
                center: map(*center),
                radius: scale * radius,
            },
            Shape::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => Shape::Ellipse {
                center: map(*center),
                semi_major: scale * semi_major,
                semi_minor: scale * semi_minor,
                rotation: rotation + angle,
            },
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: vertices.iter().map(|&v| map(v)).collect(),
            },
            Shape::ArcChain { pieces } => Shape::ArcChain {
                pieces: pieces
                    .iter()
                    .map(|p| match *p {
                        Piece::Segment { start, end } => Piece::Segment {
                            start: map(start),
                            end: map(end),
                        },
                        Piece::Arc {
                            center,
                            radius,
                            theta_start,
                            theta_end,
                        } => Piece::Arc {
                            center: map(center),
                            radius: scale * radius,
                            theta_start: theta_start + angle,
                            theta_end: theta_end + angle,
                        },
                    })
                    .collect(),
            },
        }
    }

    /// Whether the shape is star-shaped with respect to `c`, i.e. every ray from
    /// `c` crosses the boundary exactly once.
    pub fn is_star_shaped_about(&self, c: Point) -> bool {
        match self {
            Shape::Disk { .. } | Shape::Ellipse { .. } => self.contains(c),
            _ => arcs(self).iter().all(|arc| {
                let n = match arc.curve {
                    Curve::Segment { .. } => 1,
                    _ => 64,
                };
                (0..=n).all(|i| {
                    let t = i as f64 / n as f64;
                    cross(arc.point(t) - c, arc.derivative(t)) > 0.0
                })
            }),
        }
    }
}

fn bounding_diameter(pts: &[Point]) -> f64 {
    let (mut lo, mut hi) = (
        Complex64::new(f64::INFINITY, f64::INFINITY),
        Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in pts {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    (hi - lo).norm()
}

fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| cross(pts[i], pts[(i + 1) % n])).sum::<f64>()
}

fn point_in_polygon(vertices: &[Point], z: Point) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[j]);
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if z.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    // collinear / touching cases
    (d1 == 0.0 && point_segment_distance(c, a, b) == 0.0)
        || (d2 == 0.0 && point_segment_distance(d, a, b) == 0.0)
        || (d3 == 0.0 && point_segment_distance(a, c, d) == 0.0)
        || (d4 == 0.0 && point_segment_distance(b, c, d) == 0.0)
}

fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Minimal distance between two closed polylines.
fn polyline_distance(p: &[Point], q: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        for j in 0..q.len() {
            let (c, d) = (q[j], q[(j + 1) % q.len()]);
            best = best.min(segment_distance(a, b, c, d));
        }
    }
    best
}

fn validate_polygon(vertices: &[Point]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::DegenerateShape(format!(
            "polygon needs at least 3 vertices, got {n}"
        )));
    }
    if vertices.iter().any(|v| !finite(*v)) {
        return Err(Error::DegenerateShape(
            "polygon vertex is not finite".into(),
        ));
    }
    for i in 0..n {
        let prev = vertices[(i + n - 1) % n];
        let (cur, next) = (vertices[i], vertices[(i + 1) % n]);
        if cur == next {
            return Err(Error::DegenerateShape(format!(
                "repeated polygon vertex {cur}"
            )));
        }
        let tau = turn(cur - prev, next - cur);
        if tau.abs() < SMOOTH_TURN || (PI - tau.abs()) < SMOOTH_TURN {
            return Err(Error::DegenerateShape(format!(
                "collinear adjacent edges at vertex {cur}"
            )));
        }
    }
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::DegenerateShape(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    if signed_area(vertices) <= 0.0 {
        return Err(Error::DegenerateShape(
            "polygon vertices must be in counterclockwise order".into(),
        ));
    }
    Ok(())
}

fn validate_arc_chain(pieces: &[Piece]) -> Result<()> {
    if pieces.is_empty() {
        return Err(Error::DegenerateShape("arc chain has no pieces".into()));
    }
    for p in pieces {
        match *p {
            Piece::Segment { start, end } => {
                if !finite(start) || !finite(end) || start == end {
                    return Err(Error::DegenerateShape(format!(
                        "degenerate segment {start} -> {end}"
                    )));
                }
            }
            Piece::Arc {
                center,
                radius,
                theta_start,
                theta_end,
            } => {
                let sweep = (theta_end - theta_start).abs();
                if !finite(center)
                    || !(radius > 0.0)
                    || !radius.is_finite()
                    || !(sweep > 0.0)
                    || sweep > TAU + 1e-12
                {
                    return Err(Error::DegenerateShape(format!(
                        "arc about {center} needs positive radius and sweep in (0, 2π]"
                    )));
                }
            }
        }
    }
    let scale = bounding_diameter(
        &pieces
            .iter()
            .flat_map(|p| [p.start(), p.end()])
            .collect::<Vec<_>>(),
    )
    .max(
        pieces
            .iter()
            .map(|p| p.curve().length())
            .fold(0.0, f64::max),
    );
    let n = pieces.len();
    for i in 0..n {
        let gap = (pieces[i].end() - pieces[(i + 1) % n].start()).norm();
        if gap > JOIN_TOL * scale {
            return Err(Error::DegenerateShape(format!(
                "arc chain pieces {i} and {} do not join (gap {gap:.3e})",
                (i + 1) % n
            )));
        }
    }
    // Self-intersection on a polyline approximation; the samples adjacent to a
    // shared endpoint are skipped.
    let lines: Vec<Vec<Point>> = pieces
        .iter()
        .map(|p| {
            let curve = p.curve();
            let k = match p {
                Piece::Segment { .. } => 1,
                Piece::Arc { .. } => SAMPLES_PER_PIECE,
            };
            (0..=k).map(|s| curve.point(s as f64 / k as f64)).collect()
        })
        .collect();
    let sag = lines
        .iter()
        .zip(pieces)
        .map(|(_, p)| match *p {
            Piece::Segment { .. } => 0.0,
            Piece::Arc {
                radius,
                theta_start,
                theta_end,
                ..
            } => {
                let h = (theta_end - theta_start).abs() / SAMPLES_PER_PIECE as f64;
                radius * (1.0 - (0.5 * h).cos())
            }
        })
        .fold(0.0, f64::max);
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent_next = j == i + 1;
            let adjacent_prev = i == 0 && j == n - 1;
            if n == 1 {
                continue;
            }
            let a = &lines[i];
            let b = &lines[j];
            for s in 0..a.len() - 1 {
                for u in 0..b.len() - 1 {
                    if adjacent_next && s == a.len() - 2 && u == 0 {
                        continue;
                    }
                    if adjacent_prev && s == 0 && u == b.len() - 2 {
                        continue;
                    }
                    if n == 2 && ((s == a.len() - 2 && u == 0) || (s == 0 && u == b.len() - 2)) {
                        continue;
                    }
                    let dist = segment_distance(a[s], a[s + 1], b[u], b[u + 1]);
                    if dist <= 2.0 * sag && dist < 1e-12 * scale.max(1.0) + 2.0 * sag {
                        return Err(Error::DegenerateShape(format!(
                            "arc chain pieces {i} and {j} intersect"
                        )));
                    }
                }
            }
        }
    }
    let poly: Vec<Point> = lines
        .iter()
        .flat_map(|l| l[..l.len() - 1].iter().copied())
        .collect();
    if signed_area(&poly) <= 0.0 {
        return Err(Error::DegenerateShape(
            "arc chain must be traversed counterclockwise".into(),
        ));
    }
    Ok(())
}

fn shape_gap(a: &Shape, b: &Shape) -> f64 {
    match (a, b) {
        (
            Shape::Disk {
                center: c1,
                radius: r1,
            },
            Shape::Disk {
                center: c2,
                radius: r2,
            },
        ) => (c1 - c2).norm() - r1 - r2,
        _ => {
            let pa = a.polyline(SAMPLES_PER_PIECE);
            let pb = b.polyline(SAMPLES_PER_PIECE);
            let dist = polyline_distance(&pa, &pb);
            let sag = a.scale().max(b.scale()) * 2.0 * (PI / SAMPLES_PER_PIECE as f64).powi(2);
            if dist <= sag || b.contains(pa[0]) || a.contains(pb[0]) {
                // Intersecting or nested.
                if dist <= sag {
                    -1.0
                } else {
                    -dist
                }
            } else {
                dist
            }
        }
    }
}

/// Checks every shape and their pairwise disjointness; returns the minimal gap.
pub fn validate_scene(scene: &Scene) -> Result<SceneCheck> {
    if scene.shapes.is_empty() {
        return Err(Error::EmptyScene);
    }
    if scene.labels.len() != scene.shapes.len() {
        return Err(Error::Config(
            "label count does not match shape count".into(),
        ));
    }
    for shape in &scene.shapes {
        shape.validate()?;
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..scene.shapes.len() {
        for j in (i + 1)..scene.shapes.len() {
            let gap = shape_gap(&scene.shapes[i], &scene.shapes[j]);
            if gap <= 0.0 {
                return Err(Error::Overlap {
                    first: i,
                    second: j,
                    gap,
                });
            }
            min_gap = min_gap.min(gap);
        }
    }
    Ok(SceneCheck { min_gap })
}

/// Corners of a shape boundary, in traversal order.
pub fn corners(shape: &Shape) -> Vec<Corner> {
    let pieces: Vec<(Point, Complex64, Complex64)> = match shape {
        Shape::Disk { .. } | Shape::Ellipse { .. } => return Vec::new(),
        _ => arcs(shape)
            .iter()
            .map(|a| (a.point(0.0), a.derivative(0.0), a.derivative(1.0)))
            .collect(),
    };
    let n = pieces.len();
    let mut out = Vec::new();
    for i in 0..n {
        let incoming = pieces[(i + n - 1) % n].2;
        let (location, outgoing, _) = pieces[i];
        let tau = turn(incoming, outgoing);
        if tau.abs() > SMOOTH_TURN {
            out.push(Corner {
                location,
                omega_angle: PI + tau,
            });
        }
    }
    out
}

/// Positively oriented cover of the boundary by analytic arcs.
pub fn arcs(shape: &Shape) -> Vec<ParametricArc> {
    match shape {
        Shape::Disk { center, radius } => vec![ParametricArc::smooth(Curve::CircularArc {
            center: *center,
            radius: *radius,
            theta_start: 0.0,
            theta_end: TAU,
        })],
        Shape::Ellipse {
            center,
            semi_major,
            semi_minor,
            rotation,
        } => vec![ParametricArc::smooth(Curve::Ellipse {
            center: *center,
            semi_major: *semi_major,
            semi_minor: *semi_minor,
            rotation: *rotation,
        })],
        Shape::Polygon { vertices } => {
            let n = vertices.len();
            (0..n)
                .map(|i| ParametricArc {
                    curve: Curve::Segment {
                        start: vertices[i],
                        end: vertices[(i + 1) % n],
                    },
                    singular_start: true,
                    singular_end: true,
                })
                .collect()
        }
        Shape::ArcChain { pieces } => {
            let n = pieces.len();
            let curves: Vec<Curve> = pieces.iter().map(Piece::curve).collect();
            let kink = |i: usize, j: usize| {
                // junction between end of curve i and start of curve j
                turn(curves[i].derivative(1.0), curves[j].derivative(0.0)).abs() > SMOOTH_TURN
            };
            (0..n)
                .map(|i| ParametricArc {
                    curve: curves[i],
                    singular_start: kink((i + n - 1) % n, i),
                    singular_end: kink(i, (i + 1) % n),
                })
                .collect()
        }
    }
}

/// A point strictly inside the shape, used as the default pole center.
pub fn interior_anchor(shape: &Shape) -> Result<Point> {
    match shape {
        Shape::Disk { center, .. } | Shape::Ellipse { center, .. } => Ok(*center),
        Shape::Polygon { vertices } => {
            let avg = vertices.iter().sum::<Point>() / vertices.len() as f64;
            if shape.contains(avg) {
                return Ok(avg);
            }
            let centroid = area_centroid(vertices);
            if shape.contains(centroid) {
                Ok(centroid)
            } else {
                Err(Error::DegenerateShape(
                    "no interior anchor found for polygon".into(),
                ))
            }
        }
        Shape::ArcChain { .. } => {
            let centroid = area_centroid(&shape.polyline(4 * SAMPLES_PER_PIECE));
            if shape.contains(centroid) {
                Ok(centroid)
            } else {
                Err(Error::DegenerateShape(
                    "no interior anchor found for arc chain".into(),
                ))
            }
        }
    }
}

fn area_centroid(pts: &[Point]) -> Point {
    let n = pts.len();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut area2 = 0.0;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let w = cross(a, b);
        area2 += w;
        acc += (a + b) * w;
    }
    acc / (3.0 * area2)
}

/// Image of the scene under `z ↦ a·z + b`.
pub fn transform(scene: &Scene, a: Complex64, b: Complex64) -> Result<Scene> {
    if a == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroScale);
    }
    Ok(Scene {
        shapes: scene.shapes.iter().map(|s| s.transformed(a, b)).collect(),
        labels: scene.labels.clone(),
    })
}

/// Polygon with corners `1, i, −1, −i` scaled by `half_diagonal`.
pub fn square(half_diagonal: f64) -> Shape {
    Shape::Polygon {
        vertices: vec![
            Complex64::new(half_diagonal, 0.0),
            Complex64::new(0.0, half_diagonal),
            Complex64::new(-half_diagonal, 0.0),
            Complex64::new(0.0, -half_diagonal),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Point {
        Complex64::new(re, im)
    }

    #[test]
    fn arc_point_offsets_survive_translation() {
        let seg = ParametricArc {
            curve: Curve::Segment {
                start: c(-9.0, 7.0),
                end: c(-6.0, 9.5),
            },
            singular_start: true,
            singular_end: true,
        };
        let t = 1e-18;
        let p = seg.arc_point(t, 1.0 - t);
        assert_eq!(p.endpoint, c(-9.0, 7.0));
        assert_eq!(p.z, c(-9.0, 7.0));
        assert!((p.offset - c(3.0, 2.5) * t).norm() < 1e-33);
        let q = seg.arc_point(1.0 - 1e-9, 1e-9);
        assert_eq!(q.endpoint, c(-6.0, 9.5));
        assert!((q.offset + c(3.0, 2.5) * 1e-9).norm() < 1e-24);

        let arc = ParametricArc {
            curve: Curve::CircularArc {
                center: c(5.0, -5.0),
                radius: 2.0,
                theta_start: 0.3,
                theta_end: 2.0,
            },
            singular_start: true,
            singular_end: true,
        };
        for &t in &[1e-3, 0.2, 0.45] {
            let p = arc.arc_point(t, 1.0 - t);
            assert!((p.offset - (arc.point(t) - arc.point(0.0))).norm() < 1e-14);
            let q = arc.arc_point(1.0 - t, t);
            assert!((q.offset - (arc.point(1.0 - t) - arc.point(1.0))).norm() < 1e-14);
        }
        let tiny = arc.arc_point(1e-20, 1.0);
        let expected = Complex64::i() * 1.7e-20 * Complex64::from_polar(2.0, 0.3);
        assert!((tiny.offset - expected).norm() < 1e-34);
    }

    fn half_disk() -> Shape {
        Shape::ArcChain {
            pieces: vec![
                Piece::Segment {
                    start: c(-1.0, 0.0),
                    end: c(1.0, 0.0),
                },
                Piece::Arc {
                    center: c(0.0, 0.0),
                    radius: 1.0,
                    theta_start: 0.0,
                    theta_end: PI,
                },
            ],
        }
    }

    #[test]
    fn two_disks_gap() {
        let scene = Scene::disks(&[c(2.0, 0.0), c(-2.0, 0.0)], 1.0);
        let check = validate_scene(&scene).unwrap();
        assert_eq!(check.min_gap, 2.0);
        assert_eq!(validate_scene(&scene).unwrap(), check);
    }

    #[test]
    fn overlapping_disks_rejected() {
        let scene = Scene::disks(&[c(0.0, 0.0), c(1.5, 0.0)], 1.0);
        assert!(matches!(validate_scene(&scene), Err(Error::Overlap { .. })));
    }

    #[test]
    fn tangent_disks_rejected() {
        let scene = Scene::disks(&[c(0.0, 0.0), c(2.0, 0.0)], 1.0);
        assert!(matches!(validate_scene(&scene), Err(Error::Overlap { .. })));
    }

    #[test]
    fn twenty_five_disk_grid_is_valid() {
        let centers: Vec<Point> = (0..25).map(|k| c((k % 5) as f64, (k / 5) as f64)).collect();
        let scene = Scene::disks(&centers, 0.4);
        let check = validate_scene(&scene).unwrap();
        // oracle: brute-force pairwise distance
        let mut oracle = f64::INFINITY;
        for i in 0..25 {
            for j in (i + 1)..25 {
                oracle = oracle.min((centers[i] - centers[j]).norm() - 0.8);
            }
        }
        assert!((check.min_gap - oracle).abs() < 1e-15);
    }

    #[test]
    fn degenerate_shapes_rejected() {
        let zero = Shape::Disk {
            center: c(0.0, 0.0),
            radius: 0.0,
        };
        assert!(matches!(zero.validate(), Err(Error::DegenerateShape(_))));
        let collapsed = Shape::Polygon {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
        };
        assert!(matches!(
            collapsed.validate(),
            Err(Error::DegenerateShape(_))
        ));
        let clockwise = Shape::Polygon {
            vertices: vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)],
        };
        assert!(clockwise.validate().is_err());
        let bowtie = Shape::Polygon {
            vertices: vec![c(0.0, 0.0), c(1.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)],
        };
        assert!(bowtie.validate().is_err());
        assert!(matches!(
            validate_scene(&Scene::new(vec![])),
            Err(Error::EmptyScene)
        ));
    }

    #[test]
    fn nested_shapes_rejected() {
        let scene = Scene::new(vec![
            square(3.0),
            Shape::Disk {
                center: c(0.0, 0.0),
                radius: 0.5,
            },
        ]);
        assert!(matches!(validate_scene(&scene), Err(Error::Overlap { .. })));
    }

    #[test]
    fn polygon_and_disk_gap() {
        let scene = Scene::new(vec![
            square(1.0),
            Shape::Disk {
                center: c(3.0, 0.0),
                radius: 1.0,
            },
        ]);
        let check = validate_scene(&scene).unwrap();
        assert!((check.min_gap - 1.0).abs() < 1e-3);
    }

    #[test]
    fn disk_has_no_corners() {
        assert!(corners(&Shape::Disk {
            center: c(0.0, 0.0),
            radius: 1.0
        })
        .is_empty());
        assert!(corners(&Shape::Ellipse {
            center: c(0.0, 0.0),
            semi_major: 2.0,
            semi_minor: 1.0,
            rotation: 0.3
        })
        .is_empty());
    }

    #[test]
    fn square_corners_are_three_halves_pi() {
        let cs = corners(&square(1.0));
        assert_eq!(cs.len(), 4);
        for corner in &cs {
            assert!((corner.omega_angle - 1.5 * PI).abs() < 1e-14);
        }
        let locs: Vec<Point> = cs.iter().map(|k| k.location).collect();
        assert_eq!(
            locs,
            vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]
        );
    }

    #[test]
    fn half_disk_corners() {
        let shape = half_disk();
        shape.validate().unwrap();
        let cs = corners(&shape);
        assert_eq!(cs.len(), 2);
        for corner in &cs {
            // oracle: interior angle between the diameter and the arc tangent is π/2
            let interior = PI / 2.0;
            assert!((corner.omega_angle - (2.0 * PI - interior)).abs() < 1e-12);
        }
        let arcs = arcs(&shape);
        assert!(arcs.iter().all(|a| a.singular_start && a.singular_end));
    }

    #[test]
    fn smooth_arc_chain_junctions_are_not_corners() {
        // stadium: two segments and two half circles
        let shape = Shape::ArcChain {
            pieces: vec![
                Piece::Segment {
                    start: c(-1.0, -1.0),
                    end: c(1.0, -1.0),
                },
                Piece::Arc {
                    center: c(1.0, 0.0),
                    radius: 1.0,
                    theta_start: -PI / 2.0,
                    theta_end: PI / 2.0,
                },
                Piece::Segment {
                    start: c(1.0, 1.0),
                    end: c(-1.0, 1.0),
                },
                Piece::Arc {
                    center: c(-1.0, 0.0),
                    radius: 1.0,
                    theta_start: PI / 2.0,
                    theta_end: 1.5 * PI,
                },
            ],
        };
        shape.validate().unwrap();
        assert!(corners(&shape).is_empty());
    }

    #[test]
    fn arc_parametrizations() {
        let disk = arcs(&Shape::Disk {
            center: c(1.0, 2.0),
            radius: 0.5,
        });
        assert_eq!(disk.len(), 1);
        let t = 0.3;
        let expected = c(1.0, 2.0) + Complex64::from_polar(0.5, TAU * t);
        assert!((disk[0].point(t) - expected).norm() < 1e-15);

        let ell = arcs(&Shape::Ellipse {
            center: c(0.0, 0.0),
            semi_major: 2.0,
            semi_minor: 1.0,
            rotation: 0.0,
        });
        let expected = c(2.0 * (TAU * t).cos(), (TAU * t).sin());
        assert!((ell[0].point(t) - expected).norm() < 1e-15);
        assert_eq!(arcs(&square(1.0)).len(), 4);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let shapes = [
            Shape::Disk {
                center: c(1.0, 2.0),
                radius: 0.5,
            },
            Shape::Ellipse {
                center: c(0.0, 1.0),
                semi_major: 2.0,
                semi_minor: 1.0,
                rotation: 0.4,
            },
            half_disk(),
        ];
        let h = 1e-6;
        for shape in &shapes {
            for arc in arcs(shape) {
                for &t in &[0.1, 0.5, 0.9] {
                    let fd = (arc.point(t + h) - arc.point(t - h)) / (2.0 * h);
                    assert!(
                        (fd - arc.derivative(t)).norm() < 1e-7 * arc.derivative(t).norm().max(1.0)
                    );
                }
            }
        }
    }

    #[test]
    fn anchors() {
        assert_eq!(
            interior_anchor(&Shape::Disk {
                center: c(2.0, 0.0),
                radius: 1.0
            })
            .unwrap(),
            c(2.0, 0.0)
        );
        assert_eq!(interior_anchor(&square(1.0)).unwrap(), c(0.0, 0.0));
        let triangle = Shape::Polygon {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
        };
        let anchor = interior_anchor(&triangle).unwrap();
        assert!((anchor - c(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);
        assert!(triangle.contains(anchor));
        let hd = interior_anchor(&half_disk()).unwrap();
        // area centroid of a half disk: 4/(3π) above the diameter
        assert!(hd.re.abs() < 1e-9);
        assert!((hd.im - 4.0 / (3.0 * PI)).abs() < 1e-5);
    }

    #[test]
    fn transforms() {
        let scene = Scene::disks(&[c(2.0, 0.0), c(-2.0, 0.0)], 1.0);
        let same = transform(&scene, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(same, scene);
        let doubled = transform(&scene, c(2.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(doubled, Scene::disks(&[c(4.0, 0.0), c(-4.0, 0.0)], 2.0));
        assert!(matches!(
            transform(&scene, c(0.0, 0.0), c(1.0, 0.0)),
            Err(Error::ZeroScale)
        ));

        // rotating the square by i permutes its corners
        let sq = Scene::new(vec![square(1.0)]);
        let rotated = transform(&sq, c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        let mut before: Vec<_> = corners(&sq.shapes[0])
            .iter()
            .map(|k| (k.location * c(0.0, 1.0), k.omega_angle))
            .collect();
        let mut after: Vec<_> = corners(&rotated.shapes[0])
            .iter()
            .map(|k| (k.location, k.omega_angle))
            .collect();
        let key = |p: &(Point, f64)| {
            (p.0.re * 1e6).round() as i64 * 10_000_000 + (p.0.im * 1e6).round() as i64
        };
        before.sort_by_key(key);
        after.sort_by_key(key);
        for (b, a) in before.iter().zip(&after) {
            assert!((b.0 - a.0).norm() < 1e-14);
            assert!((b.1 - a.1).abs() < 1e-14);
        }
    }

    #[test]
    fn star_shaped_checks() {
        assert!(square(1.0).is_star_shaped_about(c(0.0, 0.0)));
        assert!(!square(1.0).is_star_shaped_about(c(2.0, 0.0)));
        let hd = half_disk();
        assert!(hd.is_star_shaped_about(interior_anchor(&hd).unwrap()));
    }
}
