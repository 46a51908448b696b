//! Approximating functions vanishing at infinity and the schedules that build them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{corners, interior_anchor, ArcPoint, Point, Scene, Shape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisFunction {
    /// `1 / (z − pole)`
    SimplePole { pole: Point },
    /// `1 / (z − center)^order`, `order ≥ 1`
    PowerPole { center: Point, order: u32 },
    /// `((z − corner)/(z − center))^exponent / (z − center)^order`, principal branch.
    CornerAdapted {
        center: Point,
        corner: Point,
        exponent: f64,
        order: u32,
    },
}

fn powi(z: Complex64, k: u32) -> Complex64 {
    match k {
        0 => Complex64::new(1.0, 0.0),
        1 => z,
        _ => z.powu(k),
    }
}

impl BasisFunction {
    /// Value at `z`, rejecting pole points and the branch cut.
    pub fn eval(&self, z: Point) -> Result<Complex64> {
        match *self {
            BasisFunction::SimplePole { pole } if z == pole => Err(Error::PoleEvaluation(z)),
            BasisFunction::PowerPole { center, .. } if z == center => Err(Error::PoleEvaluation(z)),
            BasisFunction::CornerAdapted { center, corner, .. } => {
                if z == center || z == corner {
                    return Err(Error::PoleEvaluation(z));
                }
                let w = (z - corner) / (z - center);
                if w.im == 0.0 && w.re <= 0.0 {
                    return Err(Error::BranchCut(z));
                }
                Ok(self.value(z))
            }
            _ => Ok(self.value(z)),
        }
    }

    /// Value at `z` without domain checks.
    #[inline]
    pub fn value(&self, z: Point) -> Complex64 {
        match *self {
            BasisFunction::SimplePole { pole } => (z - pole).inv(),
            BasisFunction::PowerPole { center, order } => powi(z - center, order).inv(),
            BasisFunction::CornerAdapted {
                center,
                corner,
                exponent,
                order,
            } => {
                let zc = z - center;
                let w = (z - corner) / zc;
                (w.ln() * exponent).exp() / powi(zc, order)
            }
        }
    }

    /// Value at a boundary point; a corner-adapted function whose corner is
    /// the arc endpoint uses the exact offset to it.
    #[inline]
    pub fn value_at(&self, p: &ArcPoint) -> Complex64 {
        match *self {
            BasisFunction::CornerAdapted {
                center,
                corner,
                exponent,
                order,
            } if (corner - p.endpoint).norm() <= 1e-12 * (1.0 + corner.norm()) => {
                let zc = p.z - center;
                let w = (p.offset + (p.endpoint - corner)) / zc;
                (w.ln() * exponent).exp() / powi(zc, order)
            }
            _ => self.value(p.z),
        }
    }

    /// Coefficient of `1/z` in the expansion at infinity.
    pub fn d_infinity(&self) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match *self {
            BasisFunction::SimplePole { .. } => one,
            BasisFunction::PowerPole { order, .. } => {
                if order == 1 {
                    one
                } else {
                    zero
                }
            }
            BasisFunction::CornerAdapted {
                center,
                corner,
                exponent,
                order,
            } => match order {
                // f(z) = 1 + β(c − a)/z + O(1/z²)
                0 => (center - corner) * exponent,
                1 => one,
                _ => zero,
            },
        }
    }

    /// For rational functions, the single pole and its order.
    pub fn rational_pole(&self) -> Option<(Point, u32)> {
        match *self {
            BasisFunction::SimplePole { pole } => Some((pole, 1)),
            BasisFunction::PowerPole { center, order } => Some((center, order)),
            BasisFunction::CornerAdapted { .. } => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.rational_pole().is_some()
    }

    /// The function with its pole and corner points mapped by `z ↦ a·z + b`.
    /// Up to a constant factor this is `g` composed with the inverse map.
    pub fn transformed(&self, a: Complex64, b: Complex64) -> BasisFunction {
        let map = |z: Point| a * z + b;
        match *self {
            BasisFunction::SimplePole { pole } => BasisFunction::SimplePole { pole: map(pole) },
            BasisFunction::PowerPole { center, order } => BasisFunction::PowerPole {
                center: map(center),
                order,
            },
            BasisFunction::CornerAdapted {
                center,
                corner,
                exponent,
                order,
            } => BasisFunction::CornerAdapted {
                center: map(center),
                corner: map(corner),
                exponent,
                order,
            },
        }
    }
}

/// Exponent of the corner-adapted factor for a corner of Ω-angle `omega_angle`.
pub fn corner_exponent(omega_angle: f64) -> f64 {
    0.5 * (PI / omega_angle - 1.0)
}

/// How basis functions are generated for one shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    /// Simple poles at the center and on `layers` rings (disks and ellipses).
    Rings { layers: u32 },
    /// Powers `1/(z−c)^k`, `k = 1..=n`, about the shape anchor, optionally
    /// multiplied by the corner-adapted factors.
    Powers { n: u32, corners: bool },
}

impl BasisMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BasisMode::Powers { n: 0, .. } => {
                Err(Error::Schedule("powers mode needs n >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A default basis mode plus per-shape overrides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub default: BasisMode,
    pub overrides: BTreeMap<usize, BasisMode>,
}

impl Schedule {
    pub fn uniform(mode: BasisMode) -> Self {
        Schedule {
            default: mode,
            overrides: BTreeMap::new(),
        }
    }

    pub fn rings(layers: u32) -> Self {
        Schedule::uniform(BasisMode::Rings { layers })
    }

    pub fn powers(n: u32, corners: bool) -> Self {
        Schedule::uniform(BasisMode::Powers { n, corners })
    }

    pub fn mode_for(&self, shape_index: usize) -> BasisMode {
        self.overrides
            .get(&shape_index)
            .copied()
            .unwrap_or(self.default)
    }

    /// The same schedule with every count lowered by one step, if possible.
    pub fn coarser(&self) -> Option<Schedule> {
        let step = |m: BasisMode| match m {
            BasisMode::Rings { layers } if layers > 0 => {
                Some(BasisMode::Rings { layers: layers - 1 })
            }
            BasisMode::Powers { n, corners } if n > 1 => {
                Some(BasisMode::Powers { n: n - 1, corners })
            }
            _ => None,
        };
        let default = step(self.default);
        let overrides: BTreeMap<usize, BasisMode> = self
            .overrides
            .iter()
            .map(|(&k, &m)| (k, step(m).unwrap_or(m)))
            .collect();
        let changed = default.is_some() || overrides != self.overrides;
        changed.then(|| Schedule {
            default: default.unwrap_or(self.default),
            overrides,
        })
    }
}

/// Radius fraction of ring `m ≥ 1`: the base-2 van der Corput sequence 1/2, 1/4, 3/4, 1/8, ...
/// Each layer count extends the previous one, and for `layers = 2^k − 1`
/// the fractions are exactly `m/(layers+1)`.
pub fn ring_fraction(m: u32) -> f64 {
    let (mut x, mut weight, mut k) = (0.0, 0.5, m);
    while k > 0 {
        if k & 1 == 1 {
            x += weight;
        }
        weight *= 0.5;
        k >>= 1;
    }
    x
}

fn rings(
    center: Point,
    a: f64,
    b: f64,
    rotation: f64,
    fractions: impl Iterator<Item = f64>,
) -> Vec<Point> {
    let axis = Complex64::from_polar(1.0, rotation);
    let mut pts = vec![center];
    for t in fractions {
        let (a, b) = (a * t, b * t);
        pts.push(center + axis * a);
        pts.push(center + axis * Complex64::new(0.0, b));
        pts.push(center - axis * a);
        pts.push(center - axis * Complex64::new(0.0, b));
    }
    pts
}

/// Center plus rings of four poles in the directions `±1, ±i`, at radii
/// `ring_fraction(m)·r`, `m = 1..=layers`. Layouts are nested in `layers`.
pub fn disk_pole_layout(center: Point, radius: f64, layers: u32) -> Vec<Point> {
    rings(center, radius, radius, 0.0, (1..=layers).map(ring_fraction))
}

/// Rings at fractions `m/(layers+1)` of the semi-axes.
pub fn ellipse_pole_layout(
    center: Point,
    semi_major: f64,
    semi_minor: f64,
    rotation: f64,
    layers: u32,
) -> Vec<Point> {
    rings(
        center,
        semi_major,
        semi_minor,
        rotation,
        (1..=layers).map(|m| m as f64 / (layers + 1) as f64),
    )
}

fn shape_basis(
    index: usize,
    shape: &Shape,
    mode: BasisMode,
    out: &mut Vec<BasisFunction>,
) -> Result<()> {
    mode.validate()?;
    match mode {
        BasisMode::Rings { layers } => {
            let poles = match *shape {
                Shape::Disk { center, radius } => disk_pole_layout(center, radius, layers),
                Shape::Ellipse {
                    center,
                    semi_major,
                    semi_minor,
                    rotation,
                } => ellipse_pole_layout(center, semi_major, semi_minor, rotation, layers),
                _ => {
                    return Err(Error::Schedule(format!(
                        "rings mode applies to disks and ellipses only (shape {index})"
                    )))
                }
            };
            out.extend(
                poles
                    .into_iter()
                    .map(|pole| BasisFunction::SimplePole { pole }),
            );
        }
        BasisMode::Powers {
            n,
            corners: with_corners,
        } => {
            let center = interior_anchor(shape)?;
            let cs = if with_corners {
                corners(shape)
            } else {
                Vec::new()
            };
            if !cs.is_empty() && !shape.is_star_shaped_about(center) {
                return Err(Error::DegenerateShape(format!(
                    "shape {index} is not star-shaped about its anchor {center}; corner functions need it"
                )));
            }
            for order in 1..=n {
                out.push(BasisFunction::PowerPole { center, order });
                for corner in &cs {
                    out.push(BasisFunction::CornerAdapted {
                        center,
                        corner: corner.location,
                        exponent: corner_exponent(corner.omega_angle),
                        order,
                    });
                }
            }
        }
    }
    Ok(())
}

/// All basis functions of the scene, shape by shape in scene order.
pub fn build_basis(scene: &Scene, schedule: &Schedule) -> Result<Vec<BasisFunction>> {
    if let Some((&k, _)) = schedule
        .overrides
        .iter()
        .find(|(&k, _)| k >= scene.shapes.len())
    {
        return Err(Error::Schedule(format!(
            "override for shape {k} but the scene has {}",
            scene.shapes.len()
        )));
    }
    let mut out = Vec::new();
    for (i, shape) in scene.shapes.iter().enumerate() {
        shape_basis(i, shape, schedule.mode_for(i), &mut out)?;
    }
    for i in 0..out.len() {
        for j in (i + 1)..out.len() {
            if out[i] == out[j] {
                return Err(Error::Schedule(format!(
                    "basis functions {i} and {j} coincide"
                )));
            }
        }
    }
    Ok(out)
}
