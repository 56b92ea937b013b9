//! Möbius action of SL(2,R) on the extended line and the cross-ratio.

use riccati_lie::projline::{cross_ratio, mobius_apply, ExtReal, Mat2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = Mat2::new(2.0, 1.0, 1.0, 1.0);
    println!("det A = {}", a.det());
    for x in [ExtReal::Finite(0.0), ExtReal::Finite(-1.0), ExtReal::Infinity] {
        println!("A . {x:?} = {:?}", mobius_apply(&a, x)?);
    }

    let pts = [0.5, -2.0, 1.0, 3.0].map(ExtReal::Finite);
    let before = cross_ratio(pts[0], pts[1], pts[2], pts[3])?;
    let moved = pts.map(|p| mobius_apply(&a, p).unwrap());
    let after = cross_ratio(moved[0], moved[1], moved[2], moved[3])?;
    println!("cross-ratio before {before:?}, after {after:?}");
    Ok(())
}
