use crate::geom::Point;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("state blew up at t = {t}: last valid state ({x1}, {x2})", x1 = last.x1, x2 = last.x2)]
    BlowUp { t: f64, last: Point },

    #[error("no event before t = {t_max} (closest approach {closest})")]
    NoEvent { t_max: f64, closest: f64 },

    #[error("degenerate event: target coincides with the current state at ({x1}, {x2})", x1 = at.x1, x2 = at.x2)]
    DegenerateEvent { at: Point },

    #[error("window exhausted: shift {shift} does not fit inside window [{lo}, {hi}]")]
    WindowExhausted { shift: f64, lo: f64, hi: f64 },

    #[error("time {t} outside window [{lo}, {hi}]")]
    OutsideWindow { t: f64, lo: f64, hi: f64 },

    #[error("concatenation mismatch at junction {index}: gap {gap} at ({x1}, {x2})", x1 = at.x1, x2 = at.x2)]
    ConcatenationMismatch { index: usize, gap: f64, at: Point },

    #[error("switching forbidden at ({x1}, {x2}): junction is outside the declared switch set", x1 = at.x1, x2 = at.x2)]
    SwitchForbidden { at: Point },

    #[error("path search exhausted: {0}")]
    SearchExhausted(String),

    #[error("loop closure failed: gap {gap} between ({x1}, {x2}) and the anchor", x1 = at.x1, x2 = at.x2)]
    LoopClosure { gap: f64, at: Point },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
