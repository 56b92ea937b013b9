//! Parse a coefficient, differentiate it and evaluate a deferred integral.

use riccati_lie::expr::Expr;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f: Expr = "exp(-t) * sin(2*t) + t^3".parse()?;
    let df = f.differentiate();
    println!("f(t)   = {f}");
    println!("f'(t)  = {df}");

    let area = f.integral();
    for t in [0.0, 0.5, 1.0] {
        println!("t = {t:.1}: f = {:>10.6}  f' = {:>10.6}  int_0^t f = {:>10.6}", f.eval(t)?, df.eval(t)?, area.eval(t)?);
    }

    match "1 +* t".parse::<Expr>() {
        Ok(_) => unreachable!(),
        Err(e) => println!("malformed input: {e}"),
    }
    Ok(())
}
