//! Branch vector fields, the two-branch inclusion, and numeric tolerances.

use crate::error::{Error, Result};
use crate::geom::{Point, Vec2};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Which of the two branches a segment or field belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchLabel {
    Branch1,
    Branch2,
}

impl BranchLabel {
    pub fn other(self) -> BranchLabel {
        match self {
            BranchLabel::Branch1 => BranchLabel::Branch2,
            BranchLabel::Branch2 => BranchLabel::Branch1,
        }
    }
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchLabel::Branch1 => write!(f, "branch1"),
            BranchLabel::Branch2 => write!(f, "branch2"),
        }
    }
}

/// Numeric tolerances shared across the stack.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Integration step (time).
    pub integ_step: f64,
    /// Event acceptance radius (space).
    pub event_tol: f64,
    /// State agreement at joins and period matches (space).
    pub match_tol: f64,
    /// Discretization of sup-over-time in the metric (time).
    pub time_grid: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            integ_step: 1e-3,
            event_tol: 1e-6,
            match_tol: 1e-5,
            time_grid: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("integ_step", self.integ_step),
            ("event_tol", self.event_tol),
            ("match_tol", self.match_tol),
            ("time_grid", self.time_grid),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

type FieldFn = Arc<dyn Fn(Point) -> Vec2 + Send + Sync>;
type JacobianFn = Arc<dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync>;

/// One branch of the inclusion: a C¹ vector field with an optional exact
/// Jacobian.
#[derive(Clone)]
pub struct BranchField {
    pub label: BranchLabel,
    eval: FieldFn,
    jacobian: Option<JacobianFn>,
}

impl fmt::Debug for BranchField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BranchField")
            .field("label", &self.label)
            .field("jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl BranchField {
    pub fn new<F>(label: BranchLabel, f: F) -> Self
    where
        F: Fn(Point) -> Vec2 + Send + Sync + 'static,
    {
        BranchField {
            label,
            eval: Arc::new(f),
            jacobian: None,
        }
    }

    pub fn constant(label: BranchLabel, v: Vec2) -> Self {
        BranchField::new(label, move |_| v).with_jacobian(move |_| [[0.0, 0.0], [0.0, 0.0]])
    }

    /// Linear field x ↦ A·x.
    pub fn linear(label: BranchLabel, a: [[f64; 2]; 2]) -> Self {
        BranchField::new(label, move |p: Point| {
            Vec2::new(
                a[0][0] * p.x1 + a[0][1] * p.x2,
                a[1][0] * p.x1 + a[1][1] * p.x2,
            )
        })
        .with_jacobian(move |_| a)
    }

    pub fn with_jacobian<J>(mut self, j: J) -> Self
    where
        J: Fn(Point) -> [[f64; 2]; 2] + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn eval(&self, p: Point) -> Vec2 {
        (self.eval)(p)
    }

    pub fn jacobian(&self, p: Point) -> Option<[[f64; 2]; 2]> {
        self.jacobian.as_ref().map(|j| j(p))
    }

    /// Max entrywise gap between the declared Jacobian and central finite
    /// differences of the field over the sample points. None when no
    /// Jacobian is declared.
    pub fn jacobian_fd_error(&self, points: &[Point]) -> Option<f64> {
        let jac = self.jacobian.as_ref()?;
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for &p in points {
            let j = jac(p);
            let dx1 = {
                let a = self.eval(Point::new(p.x1 + h, p.x2));
                let b = self.eval(Point::new(p.x1 - h, p.x2));
                ((a.x1 - b.x1) / (2.0 * h), (a.x2 - b.x2) / (2.0 * h))
            };
            let dx2 = {
                let a = self.eval(Point::new(p.x1, p.x2 + h));
                let b = self.eval(Point::new(p.x1, p.x2 - h));
                ((a.x1 - b.x1) / (2.0 * h), (a.x2 - b.x2) / (2.0 * h))
            };
            worst = worst
                .max((j[0][0] - dx1.0).abs())
                .max((j[1][0] - dx1.1).abs())
                .max((j[0][1] - dx2.0).abs())
                .max((j[1][1] - dx2.1).abs());
        }
        Some(worst)
    }
}

/// The two-branch differential inclusion ẋ ∈ {f₁(x), f₂(x)}.
#[derive(Debug, Clone)]
pub struct Inclusion {
    branch1: BranchField,
    branch2: BranchField,
}

impl Inclusion {
    pub fn new(branch1: BranchField, branch2: BranchField) -> Result<Self> {
        if branch1.label == branch2.label {
            return Err(Error::Parameter(
                "inclusion branches must carry distinct labels".into(),
            ));
        }
        let (branch1, branch2) = match branch1.label {
            BranchLabel::Branch1 => (branch1, branch2),
            BranchLabel::Branch2 => (branch2, branch1),
        };
        Ok(Inclusion { branch1, branch2 })
    }

    pub fn branch(&self, label: BranchLabel) -> &BranchField {
        match label {
            BranchLabel::Branch1 => &self.branch1,
            BranchLabel::Branch2 => &self.branch2,
        }
    }

    pub fn branch1(&self) -> &BranchField {
        &self.branch1
    }

    pub fn branch2(&self) -> &BranchField {
        &self.branch2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_labels_required() {
        let f = BranchField::constant(BranchLabel::Branch1, Vec2::new(1.0, 0.0));
        let g = BranchField::constant(BranchLabel::Branch1, Vec2::new(-1.0, 0.0));
        assert!(Inclusion::new(f, g).is_err());
    }

    #[test]
    fn linear_jacobian_matches_finite_differences() {
        let a = [[-0.1, -1.0], [1.0, -0.1]];
        let f = BranchField::linear(BranchLabel::Branch1, a);
        let pts: Vec<Point> = (0..10)
            .map(|i| Point::new(0.3 * i as f64 - 1.5, 0.2 * i as f64 - 1.0))
            .collect();
        let err = f.jacobian_fd_error(&pts).unwrap();
        assert!(err < 1e-4, "jacobian fd error {err}");
    }

    #[test]
    fn tolerance_validation() {
        let mut t = Tolerances::default();
        t.validate().unwrap();
        t.integ_step = 0.0;
        assert!(t.validate().is_err());
    }
}
