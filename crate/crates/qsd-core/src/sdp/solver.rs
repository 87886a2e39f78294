//! Nesterov-Todd scaled predictor-corrector iteration.
//!
//! Internally the problem is minimized with constraints equilibrated to unit
//! Frobenius norm. Per iteration and block: Cholesky factors of `X` and `Z`,
//! the NT scaling `W = G G^T` with `G^{-1} X G^{-T} = G^T Z G = diag(lambda)`,
//! a packed Schur complement `H_kl = sum_b tr(A_k W A_l W)`, and two
//! back-solves (affine and corrector) sharing one factorization.

use super::{
    BlockData, IterStat,SdpProblem, SdpSolution, SdpStatus, Sense, SolverOptions,
};
use crate::linalg::{
    cholesky_in_place, packed_cholesky, packed_solve, sym_eig, Mat, PackedLower,
};
use crate::scalar::Scalar;

/// Directed sparse entries: every nonzero (r, c) appears exactly once.
enum ConBlock<S> {
    Sparse(Vec<(u32, u32, S)>),
    Dense(Mat<S>),
}

impl<S: Scalar> ConBlock<S> {
    fn nnz_dir(&self, dim: usize) -> usize {
        match self {
            ConBlock::Sparse(e) => e.len(),
            ConBlock::Dense(_) => dim * dim,
        }
    }

    fn inner(&self, m: &Mat<S>) -> S {
        match self {
            ConBlock::Sparse(e) => e
                .iter()
                .fold(S::zero(), |acc, &(r, c, v)| acc + v * m[(r as usize, c as usize)]),
            ConBlock::Dense(d) => d.inner(m),
        }
    }

    fn add_scaled_into(&self, y: S, out: &mut Mat<S>) {
        match self {
            ConBlock::Sparse(e) => {
                for &(r, c, v) in e {
                    out[(r as usize, c as usize)] += y * v;
                }
            }
            ConBlock::Dense(d) => out.add_assign_scaled(d, y),
        }
    }
}

struct Constraint<S> {
    /// (block index, data) for blocks with nonzero data.
    blocks: Vec<(usize, ConBlock<S>)>,
    b: S,
}

fn directed<S: Scalar>(data: &BlockData<S>, scale: S) -> Option<ConBlock<S>> {
    match data {
        BlockData::Zero => None,
        BlockData::Sparse(e) => {
            if e.is_empty() {
                return None;
            }
            let mut out = Vec::with_capacity(e.len() * 2);
            for &(r, c, v) in e {
                out.push((r, c, v * scale));
                if r != c {
                    out.push((c, r, v * scale));
                }
            }
            Some(ConBlock::Sparse(out))
        }
        BlockData::Dense(m) => {
            if m.as_slice().iter().all(|&v| v == S::zero()) {
                return None;
            }
            let mut d = m.clone();
            d.scale(scale);
            Some(ConBlock::Dense(d))
        }
    }
}

pub(crate) fn solve_validated<S: Scalar>(
    problem: &SdpProblem<S>,
    options: &SolverOptions<S>,
) -> SdpSolution<S> {
    let dims = problem.block_dims.clone();
    let nb = dims.len();
    let m = problem.constraints.len();
    let total: usize = dims.iter().sum();
    let flip = match problem.sense {
        Sense::Minimize => S::one(),
        Sense::Maximize => -S::one(),
    };

    // dense objective per block (sense-flipped)
    let cblocks: Vec<Mat<S>> = (0..nb)
        .map(|i| {
            let mut c = Mat::zeros(dims[i], dims[i]);
            problem.objective.blocks[i].add_scaled_into(flip, &mut c);
            c
        })
        .collect();

    // equilibrated constraints with directed entries
    let mut scales = Vec::with_capacity(m);
    let cons: Vec<Constraint<S>> = problem
        .constraints
        .iter()
        .map(|(a, b)| {
            let nrm = a.norm_fro().max(S::from_f64(1e-300));
            scales.push(nrm);
            let inv = S::one() / nrm;
            let blocks: Vec<(usize, ConBlock<S>)> = a
                .blocks
                .iter()
                .enumerate()
                .filter_map(|(i, d)| directed(d, inv).map(|cb| (i, cb)))
                .collect();
            Constraint {
                blocks,
                b: *b * inv,
            }
        })
        .collect();
    let b_int: Vec<S> = cons.iter().map(|c| c.b).collect();
    let b_ext: Vec<S> = problem.constraints.iter().map(|(_, b)| *b).collect();
    let norm_b_int = l2(&b_int);
    let norm_b_ext = l2(&b_ext);
    let norm_c = cblocks
        .iter()
        .map(|c| {
            let f = c.norm_fro();
            f * f
        })
        .sum::<S>()
        .sqrt();

    // members per block, ascending constraint index
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for (k, c) in cons.iter().enumerate() {
        for &(bi, _) in &c.blocks {
            members[bi].push(k);
        }
    }

    // scale-aware cold start: X = Z = tau I, y = 0
    let data_max = problem
        .objective
        .max_abs()
        .max(
            problem
                .constraints
                .iter()
                .fold(S::zero(), |a, (op, b)| a.max(op.max_abs()).max(b.abs())),
        );
    let tau = S::one() + data_max;
    let mut x: Vec<Mat<S>> = dims.iter().map(|&n| scaled_identity(n, tau)).collect();
    let mut z: Vec<Mat<S>> = dims.iter().map(|&n| scaled_identity(n, tau)).collect();
    let mut y = vec![S::zero(); m];

    let mut trace: Vec<IterStat<S>> = Vec::new();
    let mut schur_regularized = false;
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0usize;
    let diverge = S::from_f64(1e12) * (S::one() + tau) * S::from_usize(total.max(1));

    let keep_h_copy = m <= 4000;
    let mut h = PackedLower::zeros(m);
    let mut h_copy = keep_h_copy.then(|| PackedLower::zeros(m));

    for iter in 0..options.max_iterations {
        iterations = iter;
        // residuals and measures
        let mut rp = vec![S::zero(); m];
        for (k, c) in cons.iter().enumerate() {
            let ax: S = c.blocks.iter().map(|(bi, cb)| cb.inner(&x[*bi])).sum();
            rp[k] = c.b - ax;
        }
        let mut rd: Vec<Mat<S>> = (0..nb)
            .map(|i| {
                let mut r = cblocks[i].clone();
                r.add_assign_scaled(&z[i], -S::one());
                r
            })
            .collect();
        for (k, c) in cons.iter().enumerate() {
            for (bi, cb) in &c.blocks {
                cb.add_scaled_into(-y[k], &mut rd[*bi]);
            }
        }
        let pobj: S = (0..nb).map(|i| cblocks[i].inner(&x[i])).sum();
        let dobj: S = dot_vec(&b_int, &y);
        let xz: S = (0..nb).map(|i| x[i].inner(&z[i])).sum();
        let mu = xz / S::from_usize(total.max(1));

        let pres_int = l2(&rp) / (S::one() + norm_b_int);
        let rp_ext: Vec<S> = rp.iter().zip(scales.iter()).map(|(&r, &s)| r * s).collect();
        let pres_ext = l2(&rp_ext) / (S::one() + norm_b_ext);
        let pres = pres_int.max(pres_ext);
        let dres = (rd
            .iter()
            .map(|r| {
                let f = r.norm_fro();
                f * f
            })
            .sum::<S>())
        .sqrt()
            / (S::one() + norm_c);
        let rel_gap = (pobj - dobj).abs() / (S::one() + pobj.abs());

        trace.push(IterStat {
            primal_obj: flip * pobj,
            dual_obj: flip * dobj,
            primal_res: pres,
            dual_res: dres,
            rel_gap,
            mu,
        });
        if options.verbose {
            eprintln!(
                "iter {:3}  pres {:9.2e}  dres {:9.2e}  gap {:9.2e}  mu {:9.2e}",
                iter,
                pres.as_f64(),
                dres.as_f64(),
                rel_gap.as_f64(),
                mu.as_f64()
            );
        }

        if pres <= options.tol_primal && dres <= options.tol_dual && rel_gap <= options.tol_gap {
            status = SdpStatus::Optimal;
            break;
        }
        let xnorm: S = (0..nb).map(|i| x[i].trace()).sum();
        let znorm: S = (0..nb).map(|i| z[i].trace()).sum();
        let ynorm = y.iter().fold(S::zero(), |a, &v| a.max(v.abs()));
        if !(xnorm.is_finite() && znorm.is_finite() && ynorm.is_finite() && mu.is_finite()) {
            status = SdpStatus::NumericalFailure;
            break;
        }
        if xnorm > diverge || znorm > diverge || ynorm > diverge {
            status = SdpStatus::InfeasibleOrUnbounded;
            break;
        }

        // per-block NT scaling
        let mut scal = Vec::with_capacity(nb);
        let mut failed = false;
        for i in 0..nb {
            match NtScaling::compute(&x[i], &z[i]) {
                Some(s) => scal.push(s),
                None => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            status = SdpStatus::NumericalFailure;
            break;
        }

        // Schur complement H_kl = sum_b tr(A_k W A_l W), packed lower
        for j in 0..m {
            h.col_mut(j).iter_mut().for_each(|v| *v = S::zero());
        }
        for bi in 0..nb {
            let w = &scal[bi].w;
            let mem = &members[bi];
            let n = dims[bi];
            let heavy_cut = 4 * n.max(4);
            for (pos_j, &j) in mem.iter().enumerate() {
                let aj = con_block(&cons[j], bi);
                if aj.nnz_dir(n) >= heavy_cut {
                    // Q = W A_j W, then pair with every i >= j in this block
                    let q = w_sandwich(w, aj, n);
                    for &i in &mem[pos_j..] {
                        let ai = con_block(&cons[i], bi);
                        let v = ai.inner(&q);
                        let cur = h.get(i, j);
                        h.set(i, j, cur + v);
                    }
                } else {
                    for &i in &mem[pos_j..] {
                        let ai = con_block(&cons[i], bi);
                        let v = pair_kernel(ai, aj, w);
                        let cur = h.get(i, j);
                        h.set(i, j, cur + v);
                    }
                }
            }
        }
        if let Some(copy) = h_copy.as_mut() {
            for j in 0..m {
                copy.col_mut(j).copy_from_slice(h.col(j));
            }
        }

        // factor with Tikhonov retries
        let mut shift = S::zero();
        let base_shift = S::from_f64(1e-12) * h.max_diag().max(S::one());
        let mut factored = packed_cholesky(&mut h).is_ok();
        let mut attempts = 0;
        while !factored && attempts < 4 {
            attempts += 1;
            shift = if shift == S::zero() {
                base_shift
            } else {
                shift * S::from_f64(100.0)
            };
            schur_regularized = true;
            match h_copy.as_ref() {
                Some(copy) => {
                    for j in 0..m {
                        h.col_mut(j).copy_from_slice(copy.col(j));
                    }
                }
                None => {
                    rebuild_schur(&mut h, &cons, &members, &scal, &dims);
                }
            }
            h.add_to_diagonal(shift);
            factored = packed_cholesky(&mut h).is_ok();
        }
        if !factored {
            status = SdpStatus::NumericalFailure;
            break;
        }

        let solve_h = |rhs: &[S], h: &PackedLower<S>| -> Vec<S> {
            let mut sol = rhs.to_vec();
            packed_solve(h, &mut sol);
            if let Some(copy) = h_copy.as_ref() {
                // one round of iterative refinement
                let mut resid = rhs.to_vec();
                packed_matvec_sub(copy, &sol, &mut resid);
                let mut corr = resid;
                packed_solve(h, &mut corr);
                for (s, c) in sol.iter_mut().zip(corr.iter()) {
                    *s += *c;
                }
            }
            sol
        };

        // ---- predictor (affine) direction ----
        // rhs_k = rp_k + <A_k, W Rd W + X>
        let mpred: Vec<Mat<S>> = (0..nb)
            .map(|i| {
                let mut t = scal[i].sandwich_w(&rd[i]);
                t.add_assign_scaled(&x[i], S::one());
                t
            })
            .collect();
        let rhs_aff: Vec<S> = (0..m)
            .map(|k| {
                rp[k]
                    + cons[k]
                        .blocks
                        .iter()
                        .map(|(bi, cb)| cb.inner(&mpred[*bi]))
                        .sum::<S>()
            })
            .collect();
        let dy_aff = solve_h(&rhs_aff, &h);
        let (dz_aff, dx_aff): (Vec<Mat<S>>, Vec<Mat<S>>) =
            directions(&cons, &rd, &dy_aff, &scal, &x, None, nb);

        // Mehrotra centering from the affine step
        let ap_aff = step_length(&x, &dx_aff, &scal, true, options.step_fraction);
        let ad_aff = step_length(&z, &dz_aff, &scal, false, options.step_fraction);
        let mut mu_aff = S::zero();
        for i in 0..nb {
            let mut xa = x[i].clone();
            xa.add_assign_scaled(&dx_aff[i], ap_aff);
            let mut za = z[i].clone();
            za.add_assign_scaled(&dz_aff[i], ad_aff);
            mu_aff += xa.inner(&za);
        }
        mu_aff = (mu_aff / S::from_usize(total.max(1))).max(S::zero());
        let ratio = if mu > S::zero() { mu_aff / mu } else { S::zero() };
        let sigma = (ratio * ratio * ratio).min(S::one()).max(S::zero());

        // ---- corrector direction ----
        let targets: Vec<Mat<S>> = (0..nb)
            .map(|i| scal[i].corrector_target(&dx_aff[i], &dz_aff[i], sigma * mu))
            .collect();
        let mcorr: Vec<Mat<S>> = (0..nb)
            .map(|i| {
                let mut t = scal[i].sandwich_w(&rd[i]);
                t.add_assign_scaled(&targets[i], -S::one());
                t
            })
            .collect();
        let rhs_corr: Vec<S> = (0..m)
            .map(|k| {
                rp[k]
                    + cons[k]
                        .blocks
                        .iter()
                        .map(|(bi, cb)| cb.inner(&mcorr[*bi]))
                        .sum::<S>()
            })
            .collect();
        let dy = solve_h(&rhs_corr, &h);
        let (dz, dx) = directions(&cons, &rd, &dy, &scal, &x, Some(&targets), nb);

        let ap = step_length(&x, &dx, &scal, true, options.step_fraction);
        let ad = step_length(&z, &dz, &scal, false, options.step_fraction);
        if options.verbose {
            eprintln!(
                "        ap_aff {:.3e} ad_aff {:.3e} sigma {:.3e} ap {:.3e} ad {:.3e}",
                ap_aff.as_f64(),
                ad_aff.as_f64(),
                sigma.as_f64(),
                ap.as_f64(),
                ad.as_f64()
            );
        }

        for i in 0..nb {
            x[i].add_assign_scaled(&dx[i], ap);
            z[i].add_assign_scaled(&dz[i], ad);
            x[i].symmetrize();
            z[i].symmetrize();
        }
        for k in 0..m {
            y[k] += ad * dy[k];
        }
        iterations = iter + 1;
    }

    // ---- final report against the original data ----
    let y_ext: Vec<S> = y
        .iter()
        .zip(scales.iter())
        .map(|(&yi, &s)| flip * yi / s)
        .collect();
    // slack of the reported problem: for Min, Z = C - A^*(y_ext); for Max the
    // convention Z = A^*(y_ext) - C holds with y_ext already sign-flipped.
    let z_ext = z.clone();
    let mut rp_fin = vec![S::zero(); m];
    for (k, (a, bv)) in problem.constraints.iter().enumerate() {
        rp_fin[k] = *bv - a.inner(&x);
    }
    let pres_fin = l2(&rp_fin) / (S::one() + norm_b_ext);
    let mut dres_fin_sq = S::zero();
    for i in 0..nb {
        let mut r = Mat::zeros(dims[i], dims[i]);
        problem.objective.blocks[i].add_scaled_into(flip, &mut r);
        r.add_assign_scaled(&z[i], -S::one());
        for (k, (a, _)) in problem.constraints.iter().enumerate() {
            a.blocks[i].add_scaled_into(-flip * y_ext[k], &mut r);
        }
        let f = r.norm_fro();
        dres_fin_sq += f * f;
    }
    let dres_fin = dres_fin_sq.sqrt() / (S::one() + norm_c);
    let pobj_fin: S = flip * (0..nb).map(|i| cblocks[i].inner(&x[i])).sum::<S>();
    let dobj_fin: S = dot_vec(&b_ext, &y_ext);
    let xz_fin: S = (0..nb).map(|i| x[i].inner(&z[i])).sum();

    SdpSolution {
        primal_blocks: x,
        dual_y: y_ext,
        dual_slack_blocks: z_ext,
        primal_value: pobj_fin,
        dual_value: dobj_fin,
        rel_gap: (pobj_fin - dobj_fin).abs() / (S::one() + pobj_fin.abs()),
        primal_residual: pres_fin,
        dual_residual: dres_fin,
        xz_inner: xz_fin,
        status,
        iterations,
        schur_regularized,
        trace,
    }
}

fn con_block<'a, S: Scalar>(c: &'a Constraint<S>, bi: usize) -> &'a ConBlock<S> {
    c.blocks
        .iter()
        .find(|(i, _)| *i == bi)
        .map(|(_, cb)| cb)
        .expect("membership list guarantees presence")
}

fn scaled_identity<S: Scalar>(n: usize, v: S) -> Mat<S> {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = v;
    }
    m
}

fn l2<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |a, &x| a + x * x).sqrt()
}

fn dot_vec<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b.iter()).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `tr(A_i W A_j W)` for sparse/sparse and mixed pairs.
fn pair_kernel<S: Scalar>(ai: &ConBlock<S>, aj: &ConBlock<S>, w: &Mat<S>) -> S {
    match (ai, aj) {
        (ConBlock::Sparse(ei), ConBlock::Sparse(ej)) => {
            let mut acc = S::zero();
            for &(p, q, a) in ei {
                let (p, q) = (p as usize, q as usize);
                let mut inner = S::zero();
                for &(r, s, c) in ej {
                    inner += c * w[(q, r as usize)] * w[(s as usize, p)];
                }
                acc += a * inner;
            }
            acc
        }
        (ConBlock::Dense(di), ConBlock::Sparse(ej)) => dense_sparse_kernel(di, ej, w),
        (ConBlock::Sparse(ei), ConBlock::Dense(dj)) => dense_sparse_kernel(dj, ei, w),
        (ConBlock::Dense(di), ConBlock::Dense(dj)) => {
            // both dense: sandwich one side
            let q = w.matmul(dj).matmul(w);
            di.inner(&q)
        }
    }
}

/// `tr(D W A_sparse W) = sum_{(r,s,c)} c * (W D W)[s, r]` evaluated without
/// forming `W D W`: each term is `row_s(W) . D . col_r(W)`.
fn dense_sparse_kernel<S: Scalar>(d: &Mat<S>, e: &[(u32, u32, S)], w: &Mat<S>) -> S {
    let n = w.rows();
    let mut acc = S::zero();
    let mut tmp = vec![S::zero(); n];
    for &(r, s, c) in e {
        let (r, s) = (r as usize, s as usize);
        // tmp = D * W[:, r] = D * row_r(W) (W symmetric)
        let wr = w.row(r);
        for (t, row) in tmp.iter_mut().zip(0..n) {
            *t = crate::linalg::dot(d.row(row), wr);
        }
        acc += c * crate::linalg::dot(w.row(s), &tmp);
    }
    acc
}

/// `W A W` for one constraint block.
fn w_sandwich<S: Scalar>(w: &Mat<S>, a: &ConBlock<S>, n: usize) -> Mat<S> {
    match a {
        ConBlock::Sparse(e) => {
            // sum of outer products (W e_p)(e_q^T W) = col_p(W) row_q(W)
            let mut out = Mat::zeros(n, n);
            for &(p, q, v) in e {
                let (p, q) = (p as usize, q as usize);
                for r in 0..n {
                    let f = v * w[(r, p)];
                    if f == S::zero() {
                        continue;
                    }
                    let wq = w.row(q);
                    let orow = out.row_mut(r);
                    for (o, &wv) in orow.iter_mut().zip(wq.iter()) {
                        *o += f * wv;
                    }
                }
            }
            out
        }
        ConBlock::Dense(d) => {
            let t = w.matmul(d);
            t.matmul(w)
        }
    }
}

fn rebuild_schur<S: Scalar>(
    h: &mut PackedLower<S>,
    cons: &[Constraint<S>],
    members: &[Vec<usize>],
    scal: &[NtScaling<S>],
    dims: &[usize],
) {
    let m = h.m;
    for j in 0..m {
        h.col_mut(j).iter_mut().for_each(|v| *v = S::zero());
    }
    for bi in 0..members.len() {
        let w = &scal[bi].w;
        let mem = &members[bi];
        let n = dims[bi];
        let heavy_cut = 4 * n.max(4);
        for (pos_j, &j) in mem.iter().enumerate() {
            let aj = con_block(&cons[j], bi);
            if aj.nnz_dir(n) >= heavy_cut {
                let q = w_sandwich(w, aj, n);
                for &i in &mem[pos_j..] {
                    let v = con_block(&cons[i], bi).inner(&q);
                    let cur = h.get(i, j);
                    h.set(i, j, cur + v);
                }
            } else {
                for &i in &mem[pos_j..] {
                    let v = pair_kernel(con_block(&cons[i], bi), aj, w);
                    let cur = h.get(i, j);
                    h.set(i, j, cur + v);
                }
            }
        }
    }
}

/// `r -= H * s` for a packed symmetric matrix stored as its lower triangle.
fn packed_matvec_sub<S: Scalar>(h: &PackedLower<S>, s: &[S], r: &mut [S]) {
    let m = h.m;
    for j in 0..m {
        let col = h.col(j);
        // diagonal
        r[j] -= col[0] * s[j];
        // below-diagonal entries serve both (i, j) and (j, i)
        for (off, &v) in col[1..].iter().enumerate() {
            let i = j + 1 + off;
            r[i] -= v * s[j];
            r[j] -= v * s[i];
        }
    }
}

/// Per-block NT scaling data.
struct NtScaling<S> {
    lx: Mat<S>,
    lz: Mat<S>,
    g: Mat<S>,
    ginv: Mat<S>,
    w: Mat<S>,
    lambda: Vec<S>,
}

impl<S: Scalar> NtScaling<S> {
    fn compute(x: &Mat<S>, z: &Mat<S>) -> Option<Self> {
        let n = x.rows();
        let mut lx = x.clone();
        if cholesky_in_place(&mut lx).is_err() {
            return None;
        }
        let mut lz = z.clone();
        if cholesky_in_place(&mut lz).is_err() {
            return None;
        }
        // K = Lx^T Z Lx, symmetric positive definite
        let zlx = z.matmul(&lx);
        let mut k = lx.matmul_tn(&zlx);
        k.symmetrize();
        let eig = sym_eig(&k, true);
        let v = eig.vectors.unwrap();
        if eig.values.iter().any(|&s2| s2 <= S::zero() || !s2.is_finite()) {
            return None;
        }
        let lambda: Vec<S> = eig.values.iter().map(|&s2| s2.sqrt()).collect();
        // G = Lx V diag(lambda^{-1/2}); Ginv = diag(lambda^{1/2}) V^T Lx^{-1}
        let mut vs = v.clone();
        for i in 0..n {
            for j in 0..n {
                vs[(i, j)] *= S::one() / lambda[j].sqrt();
            }
        }
        let g = lx.matmul(&vs);
        // B = Lx^{-T} V by back-substitution per column
        let mut bmat = Mat::zeros(n, n);
        let mut col = vec![S::zero(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = v[(i, j)];
            }
            lx.solve_lower_transpose_in_place(&mut col);
            for i in 0..n {
                bmat[(i, j)] = col[i];
            }
        }
        let mut ginv = bmat.transpose();
        for i in 0..n {
            let f = lambda[i].sqrt();
            for j in 0..n {
                ginv[(i, j)] *= f;
            }
        }
        let mut w = g.matmul_nt(&g);
        w.symmetrize();
        Some(NtScaling {
            lx,
            lz,
            g,
            ginv,
            w,
            lambda,
        })
    }

    /// `W M W`.
    fn sandwich_w(&self, mmat: &Mat<S>) -> Mat<S> {
        let t = self.w.matmul(mmat);
        let mut out = t.matmul(&self.w);
        out.symmetrize();
        out
    }

    /// `G Rhat G^T` for the Mehrotra corrector, where in scaled space
    /// `Rhat_pq = (sigma mu d_pq - lambda_p lambda_q d_pq - Chat_pq) /
    /// ((lambda_p + lambda_q)/2)` and `Chat` is the symmetrized product of
    /// the scaled affine directions.
    fn corrector_target(&self, dx_aff: &Mat<S>, dz_aff: &Mat<S>, sigma_mu: S) -> Mat<S> {
        let n = self.w.rows();
        // scaled affine directions
        let dxh = {
            let t = self.ginv.matmul(dx_aff);
            t.matmul_nt(&self.ginv)
        };
        let dzh = {
            let t = self.g.matmul_tn(dz_aff);
            t.matmul(&self.g)
        };
        let p = dxh.matmul(&dzh);
        let half = S::from_f64(0.5);
        let mut rhat = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let chat = (p[(i, j)] + p[(j, i)]) * half;
                let num = if i == j {
                    sigma_mu - self.lambda[i] * self.lambda[j] - chat
                } else {
                    -chat
                };
                rhat[(i, j)] = num / ((self.lambda[i] + self.lambda[j]) * half);
            }
        }
        let t = self.g.matmul(&rhat);
        let mut out = t.matmul_tn(&self.g);
        out.symmetrize();
        out
    }
}

/// Builds (dZ, dX) from dy: `dZ = Rd - A^*(dy)`,
/// `dX = target - W dZ W` with the affine target `-X`.
fn directions<S: Scalar>(
    cons: &[Constraint<S>],
    rd: &[Mat<S>],
    dy: &[S],
    scal: &[NtScaling<S>],
    x: &[Mat<S>],
    targets: Option<&[Mat<S>]>,
    nb: usize,
) -> (Vec<Mat<S>>, Vec<Mat<S>>) {
    let mut dz: Vec<Mat<S>> = rd.to_vec();
    for (k, c) in cons.iter().enumerate() {
        for (bi, cb) in &c.blocks {
            cb.add_scaled_into(-dy[k], &mut dz[*bi]);
        }
    }
    let mut dx = Vec::with_capacity(nb);
    for i in 0..nb {
        dz[i].symmetrize();
        let mut d = scal[i].sandwich_w(&dz[i]);
        d.scale(-S::one());
        match targets {
            Some(t) => d.add_assign_scaled(&t[i], S::one()),
            None => d.add_assign_scaled(&x[i], -S::one()),
        }
        d.symmetrize();
        dx.push(d);
    }
    (dz, dx)
}

/// Largest step fraction keeping the iterate positive definite: per block,
/// `alpha = frac / max(0, -lambda_min(L^{-1} D L^{-T}))`, capped at 1.
fn step_length<S: Scalar>(
    cur: &[Mat<S>],
    dir: &[Mat<S>],
    scal: &[NtScaling<S>],
    primal: bool,
    frac: S,
) -> S {
    let mut alpha = S::one();
    for i in 0..cur.len() {
        let l = if primal { &scal[i].lx } else { &scal[i].lz };
        let n = cur[i].rows();
        // T = L^{-1} D L^{-T}
        let mut t = Mat::zeros(n, n);
        let mut col = vec![S::zero(); n];
        for j in 0..n {
            for r in 0..n {
                col[r] = dir[i][(r, j)];
            }
            l.solve_lower_in_place(&mut col);
            for r in 0..n {
                t[(r, j)] = col[r];
            }
        }
        // right-multiply by L^{-T}: solve row-wise
        let mut row = vec![S::zero(); n];
        for r in 0..n {
            row.copy_from_slice(t.row(r));
            l.solve_lower_in_place(&mut row);
            t.row_mut(r).copy_from_slice(&row);
        }
        t.symmetrize();
        let eig = sym_eig(&t, false);
        let lam_min = eig.values[0];
        if lam_min < S::zero() {
            let step = frac / (-lam_min);
            alpha = alpha.min(step);
        }
    }
    alpha.min(S::one())
}
