//! Transform an equation by a t-dependent SL(2,R) curve and check that
//! solutions are carried to solutions.

use riccati_lie::expr::Expr;
use riccati_lie::riccati::{integrate_direct, max_trajectory_gap, RiccatiEquation, Sample, Trajectory};
use riccati_lie::transform::{compose, theta_apply, transform_coefficients, CurveSL2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eq = RiccatiEquation::parse("1", "0", "-1")?;
    let t = Expr::t();
    let curve = compose(&CurveSL2::scaling(&(0.5 * &t).exp()), &CurveSL2::translation(t.sin()));
    let image = transform_coefficients(&eq, &curve);
    println!("curve: {curve}");
    println!("before: {eq}");
    println!("after:  {image}");

    let x = integrate_direct(&eq, 0.2.into(), (0.0, 1.0), 1e-3)?;
    let mapped: Vec<_> = x
        .samples
        .iter()
        .map(|s| Sample { t: s.t, x: theta_apply(&curve, s.t, s.x).unwrap() })
        .collect();
    let mapped = Trajectory::from_samples(mapped, x.step);
    let y = integrate_direct(&image, mapped.samples[0].x, (0.0, 1.0), 1e-3)?;
    println!("mapped solution vs solution of the image: gap {:.1e}", max_trajectory_gap(&mapped, &y, 1e6));
    Ok(())
}
