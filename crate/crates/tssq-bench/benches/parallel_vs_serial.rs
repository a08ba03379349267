//! Placeholder; filled in once the experiment layer exists.
fn main() {}
