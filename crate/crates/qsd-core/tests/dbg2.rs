use qsd_core::sdp::*;
use qsd_core::linalg::Mat;

#[test]
fn dbg_simple() {
    let p = SdpProblem {
        block_dims: vec![2],
        objective: BlockOp { blocks: vec![BlockData::identity_scaled(2, 1.0)] },
        constraints: vec![(BlockOp { blocks: vec![BlockData::elementary(0, 0, 1.0)] }, 1.0)],
        sense: Sense::Minimize,
    };
    let mut o = SolverOptions::default();
    o.verbose = true;
    o.max_iterations = 30;
    let s = solve(&p, &o).unwrap();
    eprintln!("status {:?} p {} d {} X {:?}", s.status, s.primal_value, s.dual_value, s.primal_blocks[0]);
    let _ = Mat::<f64>::identity(1);
}
