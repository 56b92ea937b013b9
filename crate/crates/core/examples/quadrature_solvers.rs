//! The classical quadrature cases: linear, Bernoulli, known particular
//! solutions, constant and separable coefficients.

use riccati_lie::expr::Expr;
use riccati_lie::grid::Grid;
use riccati_lie::riccati::RiccatiEquation;
use riccati_lie::solvers::{
    reduce_with_known_solution, solve_autonomous, solve_bernoulli, solve_linear, solve_separable,
    solve_with_two_solutions, SolutionForm,
};

fn show(label: &str, form: &SolutionForm, t: f64) {
    println!("{label:<28} x({t}) = {:?}", form.eval_at(t).unwrap());
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Grid::uniform(0.0, 1.0, 101);

    let linear = RiccatiEquation::parse("t", "1", "0")?;
    show("linear, e^t - t - 1", &solve_linear(&linear, 0.0, 0.0.into(), &g)?, 1.0);

    let bernoulli = RiccatiEquation::constant(0.0, 0.0, 1.0);
    show("Bernoulli, 1/(1 - t)", &solve_bernoulli(&bernoulli, 0.0, 1.0.into(), &g)?, 0.5);

    let tanh_eq = RiccatiEquation::constant(1.0, 0.0, -1.0);
    show("one known solution, tanh", &reduce_with_known_solution(&tanh_eq, &Expr::one(), 0.0, 0.0.into(), &g)?, 1.0);
    let two = solve_with_two_solutions(&tanh_eq, &Expr::one(), &Expr::constant(-1.0), 0.0, 0.0.into(), &g)?;
    show("two known solutions, tanh", &two, 1.0);

    let tan = solve_autonomous([1.0, 0.0, 1.0], 0.0, 0.0.into());
    show("autonomous, tan", &tan, std::f64::consts::FRAC_PI_2);
    show("autonomous, tan", &tan, 3.0);

    let sep = solve_separable(&"cos(t)".parse()?, [1.0, 0.0, -1.0], 0.0, 0.0.into())?;
    show("separable, tanh(sin t)", &sep, 1.0);
    println!("tanh(sin 1) = {}", 1f64.sin().tanh());
    Ok(())
}
