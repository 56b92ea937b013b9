//! The CLI's problem-file front end, driven in-process.

use riccati_lie::cli::{cmd_solve, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = Problem::from_json(
        r#"{
            "schema": 1,
            "coefficients": { "b0": "1", "b1": "0", "b2": "-1" },
            "t_interval": [0, 1],
            "initial_conditions": [0, "inf"],
            "options": { "step": 0.1 }
        }"#,
    )?;
    let out = cmd_solve(&problem, &problem.options, None)?;
    for (name, csv) in &out.extra_files {
        println!("{name}: {} rows", csv.lines().count() - 1);
    }
    let head: String = out.json.lines().take(24).collect::<Vec<_>>().join("\n");
    println!("{head}\n...");
    Ok(())
}
