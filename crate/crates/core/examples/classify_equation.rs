//! Run every integrability detector on an equation and solve through the
//! first reduction found.

use riccati_lie::criteria::{classify, Hints, DEFAULT_TOL};
use riccati_lie::grid::Grid;
use riccati_lie::riccati::{integrate_direct, RiccatiEquation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eq = RiccatiEquation::parse("exp(t)", "4", "-2*exp(-t)")?;
    let grid = Grid::uniform(0.0, 1.0, 101);
    let reports = classify(&eq, &grid, DEFAULT_TOL, &Hints::default());
    println!("{eq}");
    for r in &reports {
        let status = if r.satisfied { "satisfied".to_string() } else { r.diagnostics.reason.clone().unwrap_or_default() };
        println!("  {:<10} {status}  {:?}", r.name.to_string(), r.constants);
    }

    let best = reports.iter().find(|r| r.satisfied).expect("a reduction");
    let reduction = best.reduction.as_ref().unwrap();
    println!("using {}: curve {}", best.name, reduction.curve);
    println!("target {}", reduction.target);
    let x = best.solve(0.0, 0.3.into(), &grid)?;
    let oracle = integrate_direct(&eq, 0.3.into(), (0.0, 1.0), 1e-3)?;
    println!("x(1) = {:?}, direct RK4 {:?}", x.eval_at(1.0)?, oracle.last().unwrap().x);
    Ok(())
}
