//! Prints the number of birth components each model emits along one trial of
//! the bundled scenario.

use soa_phd::birth::{
    build_model, fov_birth, occlusion_birth, semantic_birth, BaselineParams, BirthModelKind, SoaParams,
};
use soa_phd::sim::{build_birth_context, simulate, trial_rng, ContextConfig, Scenario};
use soa_phd::SourceConfidence;

fn main() {
    let scenario = Scenario::default();
    let scans = simulate(&scenario, &mut trial_rng(1));
    let cfg = ContextConfig::for_scenario(&scenario, 0.06, SourceConfidence::default());
    let soa = SoaParams::default();
    let base = BaselineParams::default();
    println!("step  occl  sem  fov  uniform  p_uniform  adaptive  obstacles  labeled  truth_vis");
    for k in (0..scans.len()).step_by(100) {
        let ctx = build_birth_context(&scans[k], &scenario.fov, k.checked_sub(1).map(|j| &scans[j]), &cfg);
        let count = |kind| build_model(kind, &soa, &base).birth_intensity(&ctx).unwrap().len();
        println!(
            "{k:4}  {:4} {:4} {:4}  {:7}  {:9}  {:8}  {:9}  {:7}  {:?}",
            occlusion_birth(&ctx, &soa).len(),
            semantic_birth(&ctx, &soa).len(),
            fov_birth(&ctx, &soa).len(),
            count(BirthModelKind::Uniform),
            count(BirthModelKind::PartiallyUniform),
            count(BirthModelKind::Adaptive),
            ctx.obstacles.len(),
            ctx.labeled_points.len(),
            scans[k]
                .truth
                .iter()
                .map(|t| (t.id, t.state.is_present(), t.visible))
                .collect::<Vec<_>>(),
        );
    }
}
