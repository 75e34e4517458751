//! Scheme files shipped with the crate, embedded at compile time.

pub const MULTIPORT_W4: &str = include_str!("../../schemes/multiport_w4.scheme");
pub const TRITTER_W3V: &str = include_str!("../../schemes/tritter_w3v.scheme");
pub const FOURPORT_W4V: &str = include_str!("../../schemes/fourport_w4v.scheme");
pub const PSI4_W3V: &str = include_str!("../../schemes/psi4_w3v.scheme");

/// `(file stem, contents)` for every shipped scheme.
pub const SHIPPED: [(&str, &str); 4] = [
    ("multiport_w4", MULTIPORT_W4),
    ("tritter_w3v", TRITTER_W3V),
    ("fourport_w4v", FOURPORT_W4V),
    ("psi4_w3v", PSI4_W3V),
];
