//! Shared inputs for the criterion benches.

use qmlab_core::qmring::{delta_poly, QmPoly};
use qmlab_core::CmPoint;

pub fn e4() -> QmPoly {
    QmPoly::var_q()
}

pub fn delta() -> QmPoly {
    delta_poly()
}

pub fn point(name: &str) -> CmPoint {
    qmlab_core::Registry::builtin()
        .get(name)
        .cloned()
        .expect("shipped point")
}
