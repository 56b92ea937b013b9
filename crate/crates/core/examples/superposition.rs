//! Three solutions determine all others through the cross-ratio.

use riccati_lie::expr::Expr;
use riccati_lie::grid::Grid;
use riccati_lie::projline::ExtReal;
use riccati_lie::riccati::RiccatiEquation;
use riccati_lie::solvers::superpose_three;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eq = RiccatiEquation::constant(1.0, 0.0, -1.0);
    let g = Grid::uniform(0.05, 2.0, 40);
    let (x1, x2, x3) = (Expr::one(), Expr::constant(-1.0), Expr::t().tanh());
    for k in [0.5, 2.0, -1.0] {
        let x = superpose_three(&x1, &x2, &x3, ExtReal::Finite(k), &g)?;
        let (residual, _) = eq.max_residual(&x, g.points())?;
        println!("k = {k:>4}: x(1) = {:>10.6}, ODE residual {residual:.1e}", x.eval(1.0)?);
    }
    Ok(())
}
