/// The tolerance ladder used by every check in the crate.
///
/// `tol_struct` gates structural validation (even/odd splitting,
/// self-adjointness of inputs), `tol_identity` gates the operator identities
/// of the exact transformation, `tol_generator` gates comparisons that go
/// through a matrix arcsin or exponential, `gap_tol` is the relative spectral
/// gap below which a sign operator is undefined and `eps_clamp` is the band
/// outside [-1, 1] that arcsin arguments are clamped from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tol_struct: f64,
    pub tol_identity: f64,
    pub tol_generator: f64,
    pub gap_tol: f64,
    pub eps_clamp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_struct: 1e-12,
            tol_identity: 1e-10,
            tol_generator: 1e-9,
            gap_tol: 1e-8,
            eps_clamp: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("tol_struct", self.tol_struct),
            ("tol_identity", self.tol_identity),
            ("tol_generator", self.tol_generator),
            ("gap_tol", self.gap_tol),
            ("eps_clamp", self.eps_clamp),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        Ok(())
    }
}

/// `defect / scale`, or the bare defect when the scale vanishes.
pub fn relative(defect: f64, scale: f64) -> f64 {
    if scale > f64::MIN_POSITIVE {
        defect / scale
    } else {
        defect
    }
}
