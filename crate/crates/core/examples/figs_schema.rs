//! Produces tables through the CLI entry point and checks them against figure recipes.
use nhrelax::cli::main_with_args;
use nhrelax::figs::{validate, FigureId, FigureRecipe};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("nhrelax_figs_example");
    let sweep = dir.join("sweep.csv");
    let code = main_with_args(["nhrelax", "sweep", "--axis", "kappa", "--values", "0.5,0.7,0.9", "--L", "40", "--Gamma", "0.2", "-o", sweep.to_str().unwrap()]);
    assert_eq!(code, 0);
    let traj = dir.join("relax.csv");
    assert_eq!(main_with_args(["nhrelax", "relax", "--L", "40", "--trajectory", "-o", traj.to_str().unwrap()]), 0);
    for (figure, input) in [(FigureId::Fig1c, sweep), (FigureId::RelaxCurves, dir.join("relax.trajectory.csv"))] {
        let recipe = FigureRecipe { figure, inputs: vec![input], output: dir.join(format!("{}.svg", figure.label())) };
        let tables = validate(&recipe)?;
        println!("{}: {} rows, overlay {:?}", figure.label(), tables[0].rows.len(), figure.overlay());
    }
    Ok(())
}
