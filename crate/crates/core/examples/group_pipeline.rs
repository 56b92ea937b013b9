//! Solve on SL(2,R) instead: integrate Ȧ = a(t) A and read the solution
//! off as x(t) = A(t) · x0, for every initial value at once.

use riccati_lie::projline::ExtReal;
use riccati_lie::riccati::{integrate_direct, max_trajectory_gap, RiccatiEquation};
use riccati_lie::sl2::{algebra_curve_from_riccati, integrate_group_equation, reconstruct_solution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eq = RiccatiEquation::parse("cos(t)", "t", "-exp(-t)")?;
    let a = algebra_curve_from_riccati(&eq);
    let group = integrate_group_equation(&a, (0.0, 2.0), 1e-3)?;
    println!("{eq}");
    println!("A(2) = {:?}, max |det - 1| = {:.1e}", group.samples.last().unwrap().1, group.max_det_defect());

    for x0 in [ExtReal::Finite(-1.0), ExtReal::Finite(0.5), ExtReal::Infinity] {
        let via_group = reconstruct_solution(&group, x0);
        let direct = integrate_direct(&eq, x0, (0.0, 2.0), 1e-3)?;
        println!(
            "x0 = {x0:?}: x(2) = {:?}, gap to direct RK4 {:.1e}",
            via_group.last().unwrap().x,
            max_trajectory_gap(&via_group, &direct, 1e6)
        );
    }
    Ok(())
}
