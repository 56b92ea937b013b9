//! RK4 on the projective line: x' = 1 + x² from x(0) = 0 is tan(t), which
//! passes through infinity at t = π/2.

use riccati_lie::riccati::{integrate_direct, RiccatiEquation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eq = RiccatiEquation::constant(1.0, 0.0, 1.0);
    let traj = integrate_direct(&eq, 0.0.into(), (0.0, 3.0), 1e-3)?;
    println!("{eq}");
    println!("{} samples, chart switches at {:?}", traj.len(), traj.chart_switches);
    println!("crosses infinity near t = {:?} (pi/2 = {:.6})", traj.infinity_crossings(), std::f64::consts::FRAC_PI_2);
    let end = traj.last().unwrap();
    println!("x(3) = {:?}, tan(3) = {}", end.x, 3f64.tan());

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, traj.to_csv())?;
        println!("wrote {path}");
    }
    Ok(())
}
