//! A homography with determinant -1 factors as a curve in SL(2,R) after
//! the flip y -> -y.

use riccati_lie::grid::Grid;
use riccati_lie::projline::ExtReal;
use riccati_lie::transform::{normalize_negative_determinant, theta_apply};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::uniform(0.0, 1.0, 11);
    let entries = ["-exp(t)", "0", "0", "1"].map(|s| s.parse().unwrap());
    let (flipped, curve) = normalize_negative_determinant(entries, &grid)?;
    println!("y' = -e^t y: flip = {flipped}, curve = {curve}");
    for y in [0.5, -2.0] {
        let t: f64 = 0.7;
        let h = -f64::exp(t) * y;
        let c = theta_apply(&curve, t, ExtReal::Finite(-y))?;
        println!("t = {t}, y = {y}: h(y) = {h}, c(-y) = {c:?}");
    }
    Ok(())
}
