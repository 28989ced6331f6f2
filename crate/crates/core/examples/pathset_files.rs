//! Path-set files: load the bundled scenario, write it with phases, reload
//! it, and build synthetic test scenarios.
//!
//! Run: `cargo run --example pathset_files -- [out.csv]`

use extrapolate::pathset_io::{
    load_pathset, prune_weak_paths, save_pathset, synthesize_scenario, RecipeParams, ScenarioSpec,
};
use extrapolate::Result;

fn main() -> Result<()> {
    let paths = load_pathset(&ScenarioSpec::bundled("fig2", 2019))?;
    println!(
        "bundled fig2: {} paths, delays up to {:.3} us, gain sum {:.15}",
        paths.len(),
        paths.max_delay() * 1e6,
        paths.total_gain()
    );
    let strong = prune_weak_paths(&paths, 1e-6)?;
    println!("{} paths above 1e-6", strong.len());

    let out = std::env::args().nth(1).unwrap_or_else(|| "fig2_with_phases.csv".into());
    save_pathset(&paths, &out)?;
    let reloaded = load_pathset(&ScenarioSpec::file(&out, 0))?;
    let same = paths
        .iter()
        .zip(reloaded.iter())
        .all(|(a, b)| a.tau == b.tau && a.phi == b.phi && a.theta == b.theta);
    println!("saved to {out}; delays and angles reload bit-identically: {same}");

    let params = RecipeParams {
        period: 1.0 / 20e6,
        center: 0.0,
    };
    for recipe in [
        "single-path",
        "two-path-delay-separated(100)",
        "two-path-angle-separated(0.5)",
        "grid(4,5,0.5)",
    ] {
        let set = synthesize_scenario(&recipe.parse()?, &params)?;
        let delays: Vec<String> = set.iter().map(|p| format!("{:.0}", p.tau / params.period)).collect();
        println!("{recipe}: delays [{}] T", delays.join(", "));
    }
    Ok(())
}
