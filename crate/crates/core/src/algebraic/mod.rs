//! Integer polynomials, certified roots and Garsia certification.

mod complex;
mod garsia;
mod polynomial;
mod roots;

pub use garsia::{
    certify_garsia, Certification, GarsiaCertificate, Rejection, RejectionCode, MAX_CERTIFIED_DEGREE,
};
pub use polynomial::{parse_polynomial, IntPolynomial};
pub use roots::{all_roots, RootEnclosure, RootSet};
