//! Exact-arithmetic toolkit for point sets in Desarguesian projective planes PG(2,q):
//! finite fields, incidence structures, line-intersection classification (exact and
//! mod p), named construction families, Rédei-polynomial machinery for renitent
//! lines, exhaustive searches, and the group divisible designs induced by two-secant
//! structures.

pub mod gf;
pub mod plane;
pub mod analysis;
pub mod constructions;
pub mod redei;
pub mod search;
pub mod designs;
pub mod io;
