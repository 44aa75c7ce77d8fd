//! Decomposing nonderogatory matrices over finite fields of odd
//! characteristic `p` as `E + V` with `E^p = E` and `V^3 = 0`.

pub mod field;
pub mod matf;
pub mod canonical;
pub mod decomp;
pub mod oracle;
