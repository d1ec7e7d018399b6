//! Writes a synthetic sparse binary dataset with the shape of `w1a` in LIBSVM format.
//!
//! ```text
//! cargo run -p gradclip --example make_w1a_like -- <rows> <seed> > out.libsvm
//! ```

use gradclip::data::{synthetic_binary, SyntheticSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let rows: usize = args.next().map_or(500, |s| s.parse().expect("row count"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let ds = synthetic_binary(SyntheticSpec::w1a_like(rows), seed).expect("valid spec");
    print!("{}", ds.to_libsvm());
}
