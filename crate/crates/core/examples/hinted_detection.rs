//! Detectors whose conditions involve free functions take them as hints.

use riccati_lie::criteria::{classify, CriterionName, Hints, Zh99EHint, DEFAULT_TOL};
use riccati_lie::expr::Expr;
use riccati_lie::grid::Grid;
use riccati_lie::riccati::RiccatiEquation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eq = RiccatiEquation::parse("2 - t + t^2", "1 - 2*t", "1")?;
    let grid = Grid::uniform(0.0, 1.0, 101);
    for b in [1.0, 1.01] {
        let hints = Hints {
            zh99_e: Some(Zh99EHint { e: Expr::t(), d: Expr::one(), a: 1.0, b, c: 1.0 }),
            ..Hints::default()
        };
        let reports = classify(&eq, &grid, DEFAULT_TOL, &hints);
        let r = reports.iter().find(|r| r.name == CriterionName::Zh99E).unwrap();
        println!(
            "b = {b}: satisfied = {}, deviation = {:?}, reason = {:?}",
            r.satisfied, r.diagnostics.max_deviation, r.diagnostics.reason
        );
    }
    Ok(())
}
