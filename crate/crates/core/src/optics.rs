//! Paraxial ray algebra: chief rays, 2×2 transfer matrices and the two
//! field-induced splitting transforms.
//!
//! Splitting is one-to-two and affine in angle, so it is not a
//! [`TransferMatrix`]; it lives as [`split`] / [`angular_enhance`] acting on
//! rays directly. Everything that *is* linear keeps unit determinant.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest |angle| (rad) accepted before the small-angle formalism is abandoned.
pub const PARAXIAL_LIMIT: f64 = 0.1;

/// Position (m) and slope (rad) of a chief ray relative to the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayState {
    pub position: f64,
    pub angle: f64,
}

impl RayState {
    pub fn new(position: f64, angle: f64) -> Result<Self> {
        let ray = RayState { position, angle };
        ray.check()?;
        Ok(ray)
    }

    pub const fn axial() -> Self {
        RayState {
            position: 0.0,
            angle: 0.0,
        }
    }

    fn check(&self) -> Result<()> {
        if self.position.is_finite() && self.angle.is_finite() && self.angle.abs() < PARAXIAL_LIMIT
        {
            Ok(())
        } else {
            Err(Error::Paraxial {
                position: self.position,
                angle: self.angle,
            })
        }
    }
}

/// `[[a, b], [c, d]]` acting on `(position, angle)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self · rhs` (rhs acts first).
    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &TransferMatrix) -> TransferMatrix {
        next.mul(self)
    }

    pub fn apply(&self, ray: RayState) -> Result<RayState> {
        RayState::new(
            self.a * ray.position + self.b * ray.angle,
            self.c * ray.position + self.d * ray.angle,
        )
    }
}

/// Free-space propagation over `distance` metres.
pub fn propagation_matrix(distance: f64) -> Result<TransferMatrix> {
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(invalid(format!(
            "propagation distance must be finite and >= 0, got {distance}"
        )));
    }
    Ok(TransferMatrix {
        a: 1.0,
        b: distance,
        c: 0.0,
        d: 1.0,
    })
}

/// Thin lens (or mirror in the unfolded frame) of focal length `focal`.
///
/// Negative focal lengths defocus; an infinite focal length is the identity.
pub fn focusing_matrix(focal: f64) -> Result<TransferMatrix> {
    if focal == 0.0 || focal.is_nan() {
        return Err(invalid(format!(
            "focal length must be non-zero, got {focal}"
        )));
    }
    Ok(TransferMatrix {
        a: 1.0,
        b: 0.0,
        c: -1.0 / focal,
        d: 1.0,
    })
}

/// Product of `matrices` as written: the last element acts first.
pub fn compose(matrices: &[TransferMatrix]) -> Result<TransferMatrix> {
    let (first, rest) = matrices.split_first().ok_or(Error::EmptyComposition)?;
    Ok(rest.iter().fold(*first, |acc, m| acc.mul(m)))
}

/// Which of the two split branches a ray belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Split a ray into two branches at a point. The `+` branch comes first.
pub fn split(ray: RayState, theta_split: f64) -> Result<(RayState, RayState)> {
    check_split_angle(theta_split)?;
    Ok((
        RayState::new(ray.position, ray.angle + theta_split)?,
        RayState::new(ray.position, ray.angle - theta_split)?,
    ))
}

/// Second kick applied on leaving the field, same sign as the branch's split.
pub fn angular_enhance(ray: RayState, theta_split: f64, branch: Branch) -> Result<RayState> {
    check_split_angle(theta_split)?;
    RayState::new(ray.position, ray.angle + branch.sign() * theta_split)
}

fn check_split_angle(theta_split: f64) -> Result<()> {
    if theta_split >= 0.0 && theta_split.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "splitting angle must be finite and >= 0, got {theta_split}"
        )))
    }
}

/// Curvature of a cavity mirror, in the unfolded (lens-equivalent) frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Mirror {
    Planar,
    /// Focusing mirror; `focal` is the (positive) focal length R/2.
    Concave {
        #[serde(rename = "focal_m")]
        focal: f64,
    },
    /// Defocusing mirror; `focal` is the focal-length magnitude.
    Convex {
        #[serde(rename = "focal_m")]
        focal: f64,
    },
}

impl Mirror {
    /// Signed focal length; planar mirrors report `+inf`.
    pub fn focal_length(&self) -> f64 {
        match *self {
            Mirror::Planar => f64::INFINITY,
            Mirror::Concave { focal } => focal,
            Mirror::Convex { focal } => -focal,
        }
    }

    pub fn matrix(&self) -> Result<TransferMatrix> {
        match *self {
            Mirror::Planar => Ok(TransferMatrix::IDENTITY),
            Mirror::Concave { focal } | Mirror::Convex { focal } => {
                if !(focal > 0.0) || !focal.is_finite() {
                    return Err(invalid(format!(
                        "mirror focal magnitude must be finite and > 0, got {focal}"
                    )));
                }
                focusing_matrix(self.focal_length())
            }
        }
    }
}
