//! Dump the fidelity SDP data at a given noise level as JSON (for
//! cross-checking the built-in solver against external tools).

use ghznet_core::npa::problem::SdpProblem;

fn main() {
    let eps: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.13);
    let p = SdpProblem::build(eps).expect("build");
    let obj: Vec<f64> = p.objective.clone();
    let cons: Vec<(Vec<f64>, f64)> = p.constraints.clone();
    let out = serde_json::json!({
        "epsilon": eps,
        "basis_size": p.basis.len(),
        "moment_count": p.moments.len(),
        "entry_moment": p.entry_moment,
        "objective": obj,
        "constraints": cons,
    });
    println!("{}", serde_json::to_string(&out).unwrap());
}
