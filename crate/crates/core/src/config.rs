//! JSON configuration files. Unknown keys are rejected everywhere.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisMode, Schedule};
use crate::error::{Error, Result};
use crate::geometry::{Label, Piece, Point, Scene, Shape};
use crate::integrals::QuadratureSettings;
use crate::lab::{collinear_centers, random_centers};

fn pt(p: [f64; 2]) -> Point {
    Complex64::new(p[0], p[1])
}

fn arr(z: Point) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Rings {
        layers: u32,
    },
    Powers {
        n: u32,
        #[serde(default)]
        corners: bool,
    },
}

impl From<ScheduleConfig> for BasisMode {
    fn from(s: ScheduleConfig) -> Self {
        match s {
            ScheduleConfig::Rings { layers } => BasisMode::Rings { layers },
            ScheduleConfig::Powers { n, corners } => BasisMode::Powers { n, corners },
        }
    }
}

impl From<BasisMode> for ScheduleConfig {
    fn from(m: BasisMode) -> Self {
        match m {
            BasisMode::Rings { layers } => ScheduleConfig::Rings { layers },
            BasisMode::Powers { n, corners } => ScheduleConfig::Powers { n, corners },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PieceConfig {
    Segment {
        start: [f64; 2],
        end: [f64; 2],
    },
    Arc {
        center: [f64; 2],
        radius: f64,
        theta_start: f64,
        theta_end: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Disk {
        center: [f64; 2],
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<Label>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<ScheduleConfig>,
    },
    Ellipse {
        center: [f64; 2],
        semi_major: f64,
        semi_minor: f64,
        #[serde(default)]
        rotation: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<Label>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<ScheduleConfig>,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<Label>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<ScheduleConfig>,
    },
    ArcChain {
        pieces: Vec<PieceConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<Label>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<ScheduleConfig>,
    },
}

impl ShapeConfig {
    fn parts(&self) -> (Shape, Label, Option<ScheduleConfig>) {
        match self {
            ShapeConfig::Disk {
                center,
                radius,
                label,
                schedule,
            } => (
                Shape::Disk {
                    center: pt(*center),
                    radius: *radius,
                },
                label.unwrap_or_default(),
                *schedule,
            ),
            ShapeConfig::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
                label,
                schedule,
            } => (
                Shape::Ellipse {
                    center: pt(*center),
                    semi_major: *semi_major,
                    semi_minor: *semi_minor,
                    rotation: *rotation,
                },
                label.unwrap_or_default(),
                *schedule,
            ),
            ShapeConfig::Polygon {
                vertices,
                label,
                schedule,
            } => (
                Shape::Polygon {
                    vertices: vertices.iter().copied().map(pt).collect(),
                },
                label.unwrap_or_default(),
                *schedule,
            ),
            ShapeConfig::ArcChain {
                pieces,
                label,
                schedule,
            } => {
                let pieces = pieces
                    .iter()
                    .map(|p| match *p {
                        PieceConfig::Segment { start, end } => Piece::Segment {
                            start: pt(start),
                            end: pt(end),
                        },
                        PieceConfig::Arc {
                            center,
                            radius,
                            theta_start,
                            theta_end,
                        } => Piece::Arc {
                            center: pt(center),
                            radius,
                            theta_start,
                            theta_end,
                        },
                    })
                    .collect();
                (
                    Shape::ArcChain { pieces },
                    label.unwrap_or_default(),
                    *schedule,
                )
            }
        }
    }

    pub fn from_shape(shape: &Shape, label: Label) -> Self {
        let label = Some(label);
        match shape {
            Shape::Disk { center, radius } => ShapeConfig::Disk {
                center: arr(*center),
                radius: *radius,
                label,
                schedule: None,
            },
            Shape::Ellipse {
                center,
                semi_major,
                semi_minor,
                rotation,
            } => ShapeConfig::Ellipse {
                center: arr(*center),
                semi_major: *semi_major,
                semi_minor: *semi_minor,
                rotation: *rotation,
                label,
                schedule: None,
            },
            Shape::Polygon { vertices } => ShapeConfig::Polygon {
                vertices: vertices.iter().copied().map(arr).collect(),
                label,
                schedule: None,
            },
            Shape::ArcChain { pieces } => ShapeConfig::ArcChain {
                pieces: pieces
                    .iter()
                    .map(|p| match *p {
                        Piece::Segment { start, end } => PieceConfig::Segment {
                            start: arr(start),
                            end: arr(end),
                        },
                        Piece::Arc {
                            center,
                            radius,
                            theta_start,
                            theta_end,
                        } => PieceConfig::Arc {
                            center: arr(center),
                            radius,
                            theta_start,
                            theta_end,
                        },
                    })
                    .collect(),
                label,
                schedule: None,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u32>,
}

/// Quadrature settings from a config section and command-line overrides.
pub fn quadrature_settings(
    cfg: Option<QuadratureConfig>,
    tol: Option<f64>,
    depth: Option<u32>,
) -> Result<QuadratureSettings> {
    let d = QuadratureSettings::default();
    let cfg = cfg.unwrap_or(QuadratureConfig {
        abs_tol: None,
        max_depth: None,
    });
    QuadratureSettings::new(
        tol.or(cfg.abs_tol).unwrap_or(d.abs_tol),
        depth.or(cfg.max_depth).unwrap_or(d.max_depth),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub shapes: Vec<ShapeConfig>,
    pub schedule: ScheduleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
}

impl SceneConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn scene(&self) -> Result<Scene> {
        let (shapes, labels) = self
            .shapes
            .iter()
            .map(|s| {
                let (shape, label, _) = s.parts();
                (shape, label)
            })
            .unzip();
        Scene::with_labels(shapes, labels)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let overrides: BTreeMap<usize, BasisMode> = self
            .shapes
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.parts().2.map(|m| (i, m.into())))
            .collect();
        let schedule = Schedule {
            default: self.schedule.into(),
            overrides,
        };
        schedule.default.validate()?;
        for m in schedule.overrides.values() {
            m.validate()?;
        }
        Ok(schedule)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn centers(list: &[[f64; 2]]) -> Result<Vec<Point>> {
    if list.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Config("center coordinates must be finite".into()));
    }
    Ok(list.iter().copied().map(pt).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteConfig {
    pub centers: Vec<[f64; 2]>,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl DiscreteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn centers(&self) -> Result<Vec<Point>> {
        centers(&self.centers)
    }
}

/// Seeded random centers, for experiments without published coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCenters {
    pub n: usize,
    pub half_width: f64,
    pub min_separation: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollinearCenters {
    pub n: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CenterSource {
    Centers(Vec<[f64; 2]>),
    Random(RandomCenters),
    Collinear(CollinearCenters),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub source: CenterSource,
    pub m: usize,
    pub schedule: ScheduleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        parse(text)
    }

    /// The centers, with `seed` replacing the configured seed of a random source.
    pub fn centers(&self, seed: Option<u64>) -> Result<Vec<Point>> {
        match &self.source {
            CenterSource::Centers(list) => centers(list),
            CenterSource::Random(opts) => random_centers(
                seed.unwrap_or(opts.seed),
                opts.n,
                opts.half_width,
                opts.min_separation,
            ),
            CenterSource::Collinear(opts) => Ok(collinear_centers(opts.n, opts.spacing)),
        }
    }

    pub fn seed(&self, seed: Option<u64>) -> Option<u64> {
        match &self.source {
            CenterSource::Random(opts) => Some(seed.unwrap_or(opts.seed)),
            _ => None,
        }
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let mode: BasisMode = self.schedule.into();
        mode.validate()?;
        Ok(Schedule::uniform(mode))
    }
}
