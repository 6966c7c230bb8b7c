use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::space::Vector;

/// A nonempty closed convex set with an exact metric projection.
///
/// Box bounds use `f64::INFINITY` / `f64::NEG_INFINITY` sentinels, so a single
/// box can encode equalities (degenerate bounds), inequalities, and free
/// blocks. `Product` concatenates blocks over consecutive coordinate ranges.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Zero {
        dim: usize,
    },
    NonnegativeOrthant {
        dim: usize,
    },
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    Ball {
        center: DVector<f64>,
        radius: f64,
    },
    Product(Vec<ConvexSet>),
}

impl ConvexSet {
    pub fn zero(dim: usize) -> Self {
        ConvexSet::Zero { dim }
    }

    pub fn orthant(dim: usize) -> Self {
        ConvexSet::NonnegativeOrthant { dim }
    }

    pub fn boxed(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for i in 0..lower.len() {
            if lower[i] > upper[i] {
                return Err(Error::InvalidBounds(i));
            }
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    /// Box with uniform scalar bounds in every coordinate.
    pub fn boxed_uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(
            DVector::from_element(dim, lower),
            DVector::from_element(dim, upper),
        )
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::NegativeRadius);
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn product(blocks: Vec<ConvexSet>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.dim() == 0) {
            return Err(Error::EmptyBlock);
        }
        Ok(ConvexSet::Product(blocks))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Zero { dim } | ConvexSet::NonnegativeOrthant { dim } => *dim,
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Product(blocks) => blocks.iter().map(|b| b.dim()).sum(),
        }
    }

    /// Metric projection onto the set in the norm of `y`'s space.
    ///
    /// Coordinatewise-separable variants (zero, orthant, box) require an
    /// identity or diagonal Gram; pairing them with a dense Gram is rejected
    /// with `UnsupportedGram` rather than approximated.
    pub fn project(&self, y: &Vector) -> Result<Vector> {
        self.check_dim(y)?;
        let space = y.space();
        if space.is_separable() {
            let w = space.diagonal_weights().expect("separable gram");
            let mut out = DVector::zeros(y.dim());
            self.project_block(w.as_slice(), y.coords().as_slice(), out.as_mut_slice());
            return Ok(y.with_coords(out));
        }
        // Dense Gram: only sets whose projection does not depend on the
        // coordinate basis are exact.
        match self {
            ConvexSet::Zero { dim } => Ok(y.with_coords(DVector::zeros(*dim))),
            ConvexSet::Ball { center, radius } => {
                let c = y.with_coords(center.clone());
                let diff = y - &c;
                let n = diff.norm();
                if n <= *radius {
                    Ok(y.clone())
                } else {
                    Ok(c.axpy(radius / n, &diff))
                }
            }
            _ => Err(Error::UnsupportedGram),
        }
    }

    /// Distance to the set, `|| y - P(y) ||` in the space norm.
    pub fn dist(&self, y: &Vector) -> Result<f64> {
        let p = self.project(y)?;
        Ok((y - &p).norm())
    }

    /// Scale-invariant membership test: dist(y) <= 1e-12 * (1 + ||y||).
    pub fn contains(&self, y: &Vector) -> Result<bool> {
        Ok(self.dist(y)? <= 1e-12 * (1.0 + y.norm()))
    }

    /// Residual of the normal-cone characterization
    /// `lambda in N_K(y)  <=>  y = P_K(y + lambda)`, as `|| y - P(y + lambda) ||`.
    pub fn normal_cone_residual(&self, y: &Vector, lambda: &Vector) -> Result<f64> {
        if y.dim() != lambda.dim() {
            return Err(Error::DimensionMismatch {
                expected: y.dim(),
                got: lambda.dim(),
            });
        }
        let p = self.project(&(y + lambda))?;
        Ok((y - &p).norm())
    }

    /// Lower/upper bound vectors for box-like sets (zero, orthant, box, and
    /// products of those). `None` for balls or products containing balls.
    pub fn box_bounds(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        match self {
            ConvexSet::Zero { dim } => {
                Some((DVector::zeros(*dim), DVector::zeros(*dim)))
            }
            ConvexSet::NonnegativeOrthant { dim } => Some((
                DVector::zeros(*dim),
                DVector::from_element(*dim, f64::INFINITY),
            )),
            ConvexSet::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            ConvexSet::Ball { .. } => None,
            ConvexSet::Product(blocks) => {
                let mut lower = Vec::with_capacity(self.dim());
                let mut upper = Vec::with_capacity(self.dim());
                for b in blocks {
                    let (l, u) = b.box_bounds()?;
                    lower.extend_from_slice(l.as_slice());
                    upper.extend_from_slice(u.as_slice());
                }
                Some((DVector::from_vec(lower), DVector::from_vec(upper)))
            }
        }
    }

    pub fn is_box_like(&self) -> bool {
        self.box_bounds().is_some()
    }

    /// 0/1 diagonal generalized derivative of the projection at `s`, for
    /// box-like sets. Ties at a bound resolve to the inactive branch
    /// (derivative 1); the choice is arbitrary but deterministic.
    pub(crate) fn projection_mask(&self, s: &DVector<f64>) -> Result<DVector<f64>> {
        let (l, u) = self.box_bounds().ok_or(Error::UnsupportedSet)?;
        if s.len() != l.len() {
            return Err(Error::DimensionMismatch {
                expected: l.len(),
                got: s.len(),
            });
        }
        Ok(DVector::from_fn(s.len(), |i, _| {
            // equality coordinates always clamp
            if l[i] == u[i] {
                0.0
            } else if s[i] >= l[i] && s[i] <= u[i] {
                1.0
            } else {
                0.0
            }
        }))
    }

    fn check_dim(&self, y: &Vector) -> Result<()> {
        if y.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.dim(),
            });
        }
        Ok(())
    }

    /// Projection over a coordinate block with diagonal Gram weights `w`.
    fn project_block(&self, w: &[f64], y: &[f64], out: &mut [f64]) {
        match self {
            ConvexSet::Zero { .. } => out.fill(0.0),
            ConvexSet::NonnegativeOrthant { .. } => {
                for (o, &yi) in out.iter_mut().zip(y) {
                    *o = yi.max(0.0);
                }
            }
            ConvexSet::Box { lower, upper } => {
                for i in 0..y.len() {
                    // clamp skips infinite bounds
                    out[i] = y[i].max(lower[i]).min(upper[i]);
                }
            }
            ConvexSet::Ball { center, radius } => {
                let mut n2 = 0.0;
                for i in 0..y.len() {
                    let d = y[i] - center[i];
                    n2 += w[i] * d * d;
                }
                let n = n2.sqrt();
                if n <= *radius {
                    out.copy_from_slice(y);
                } else {
                    let t = radius / n;
                    for i in 0..y.len() {
                        out[i] = center[i] + t * (y[i] - center[i]);
                    }
                }
            }
            ConvexSet::Product(blocks) => {
                let mut off = 0;
                for b in blocks {
                    let d = b.dim();
                    b.project_block(&w[off..off + d], &y[off..off + d], &mut out[off..off + d]);
                    off += d;
                }
            }
        }
    }
}

// --- JSON representation -------------------------------------------------
//
// Tagged union {"type": "box"|"zero"|"orthant"|"ball"|"product", ...} with
// per-coordinate bounds as arrays and infinities as the strings "inf"/"-inf".

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundRepr {
    Num(f64),
    Str(String),
}

impl BoundRepr {
    fn to_f64(&self) -> std::result::Result<f64, String> {
        match self {
            BoundRepr::Num(x) => Ok(*x),
            BoundRepr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(format!("unknown bound string {other:?}")),
            },
        }
    }

    fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            BoundRepr::Str("inf".to_string())
        } else if x == f64::NEG_INFINITY {
            BoundRepr::Str("-inf".to_string())
        } else {
            BoundRepr::Num(x)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum SetRepr {
    Zero {
        dim: usize,
    },
    Orthant {
        dim: usize,
    },
    Box {
        lower: Vec<BoundRepr>,
        upper: Vec<BoundRepr>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Product {
        blocks: Vec<SetRepr>,
    },
}

impl From<&ConvexSet> for SetRepr {
    fn from(s: &ConvexSet) -> Self {
        match s {
            ConvexSet::Zero { dim } => SetRepr::Zero { dim: *dim },
            ConvexSet::NonnegativeOrthant { dim } => SetRepr::Orthant { dim: *dim },
            ConvexSet::Box { lower, upper } => SetRepr::Box {
                lower: lower.iter().map(|&x| BoundRepr::from_f64(x)).collect(),
                upper: upper.iter().map(|&x| BoundRepr::from_f64(x)).collect(),
            },
            ConvexSet::Ball { center, radius } => SetRepr::Ball {
                center: center.iter().copied().collect(),
                radius: *radius,
            },
            ConvexSet::Product(blocks) => SetRepr::Product {
                blocks: blocks.iter().map(SetRepr::from).collect(),
            },
        }
    }
}

impl SetRepr {
    fn into_set(self) -> std::result::Result<ConvexSet, String> {
        match self {
            SetRepr::Zero { dim } => Ok(ConvexSet::zero(dim)),
            SetRepr::Orthant { dim } => Ok(ConvexSet::orthant(dim)),
            SetRepr::Box { lower, upper } => {
                let l: std::result::Result<Vec<f64>, _> =
                    lower.iter().map(BoundRepr::to_f64).collect();
                let u: std::result::Result<Vec<f64>, _> =
                    upper.iter().map(BoundRepr::to_f64).collect();
                ConvexSet::boxed(DVector::from_vec(l?), DVector::from_vec(u?))
                    .map_err(|e| e.to_string())
            }
            SetRepr::Ball { center, radius } => {
                ConvexSet::ball(DVector::from_vec(center), radius).map_err(|e| e.to_string())
            }
            SetRepr::Product { blocks } => {
                let blocks: std::result::Result<Vec<ConvexSet>, String> =
                    blocks.into_iter().map(SetRepr::into_set).collect();
                ConvexSet::product(blocks?).map_err(|e| e.to_string())
            }
        }
    }
}

impl Serialize for ConvexSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SetRepr::from(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ConvexSet {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = SetRepr::deserialize(de)?;
        repr.into_set().map_err(serde::de::Error::custom)
    }
}
