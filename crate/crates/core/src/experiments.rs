//! Batch experiment runner: reproduces the iteration-count tables, the
//! two-subdomain coarsening-accuracy experiment and the dof-reduction report,
//! with CSV output.

use crate::coarsen::{graded_face_prolongation, CoarseningEntry, FaceRegionSpec, Grading};
use crate::error::Error;
use crate::fem::{assemble, assemble_rhs, DofMap, ElementFamily, Entity, Manufactured};
use crate::mesh::{jump_coefficient, BoxGrid, CoefficientField, JumpRegion, StructuredGrid};
use crate::precond::{
    setup_b1, setup_b2, IdentityPreconditioner, InterfaceMode, Preconditioner,
};
use crate::sets::{build_decomposition_sets, DecompositionSets};
use crate::sparse::{
    extract_principal_submatrix, norm2, pcg, triple_product, Factorization, SparseSpd,
};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::sync::Arc;
use std::time::Instant;

/// Model problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Elasticity,
    Maxwell,
}

impl Problem {
    pub fn family(self) -> ElementFamily {
        match self {
            Problem::Elasticity => ElementFamily::ElasticityNodal,
            Problem::Maxwell => ElementFamily::MaxwellEdge,
        }
    }
    pub fn manufactured(self) -> Manufactured {
        match self {
            Problem::Elasticity => Manufactured::ElasticityPoly,
            Problem::Maxwell => Manufactured::MaxwellMixed,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            Problem::Elasticity => "elasticity",
            Problem::Maxwell => "maxwell",
        }
    }
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "elasticity" => Ok(Problem::Elasticity),
            "maxwell" => Ok(Problem::Maxwell),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

/// Preconditioner selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    B1,
    B2,
    None,
    ExactInterfaceB2,
}

impl PrecondKind {
    pub fn name(self) -> &'static str {
        match self {
            PrecondKind::B1 => "b1",
            PrecondKind::B2 => "b2",
            PrecondKind::None => "none",
            PrecondKind::ExactInterfaceB2 => "exact-interface-b2",
        }
    }
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "b1" => Ok(PrecondKind::B1),
            "b2" => Ok(PrecondKind::B2),
            "none" => Ok(PrecondKind::None),
            "exact-interface-b2" => Ok(PrecondKind::ExactInterfaceB2),
            other => Err(Error::Config(format!("unknown preconditioner '{other}'"))),
        }
    }
}

fn parse_jump(s: &str) -> Result<JumpRegion, Error> {
    match s {
        "none" => Ok(JumpRegion::None),
        "choice1" => Ok(JumpRegion::Choice1),
        "choice2" => Ok(JumpRegion::Choice2),
        other => Err(Error::Config(format!("unknown jump region '{other}'"))),
    }
}

fn jump_name(j: JumpRegion) -> &'static str {
    match j {
        JumpRegion::None => "none",
        JumpRegion::Choice1 => "choice1",
        JumpRegion::Choice2 => "choice2",
    }
}

fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    500
}
fn default_coeff() -> f64 {
    1.0
}
fn default_jump() -> String {
    "none".into()
}

/// Declarative experiment configuration (single JSON document; all fields
/// explicit, no environment overrides).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub preconditioner: String,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    #[serde(default = "default_jump")]
    pub jump: String,
    #[serde(default = "default_coeff")]
    pub coeff_inside: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        Problem::parse(&self.problem)?;
        PrecondKind::parse(&self.preconditioner)?;
        parse_jump(&self.jump)?;
        if self.n.is_empty() || self.m.is_empty() {
            return Err(Error::Config("n and m lists must be nonempty".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol must lie in (0,1), got {}", self.tol)));
        }
        if !(self.coeff_inside > 0.0) {
            return Err(Error::Config(format!(
                "coeff_inside must be positive, got {}",
                self.coeff_inside
            )));
        }
        Ok(())
    }
}

/// One experiment outcome; the fields match the CSV columns in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub problem: String,
    pub precond: String,
    pub n: usize,
    pub m: usize,
    pub jump: String,
    pub coeff_inside: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub dofs_total: usize,
    pub setup_s: f64,
    pub solve_s: f64,
}

pub const CSV_HEADER: &str =
    "problem,precond,n,m,jump,coeff_inside,iterations,converged,final_residual,dofs_total,setup_s,solve_s";

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.problem,
            self.precond,
            self.n,
            self.m,
            self.jump,
            self.coeff_inside,
            self.iterations,
            self.converged,
            self.final_residual,
            self.dofs_total,
            self.setup_s,
            self.solve_s
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self, Error> {
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 12 {
            return Err(Error::Io(format!("expected 12 CSV fields, got {}", f.len())));
        }
        let parse_err = |what: &str| Error::Io(format!("bad {what} in CSV row"));
        Ok(ResultRow {
            problem: f[0].to_string(),
            precond: f[1].to_string(),
            n: f[2].parse().map_err(|_| parse_err("n"))?,
            m: f[3].parse().map_err(|_| parse_err("m"))?,
            jump: f[4].to_string(),
            coeff_inside: f[5].parse().map_err(|_| parse_err("coeff_inside"))?,
            iterations: f[6].parse().map_err(|_| parse_err("iterations"))?,
            converged: f[7].parse().map_err(|_| parse_err("converged"))?,
            final_residual: f[8].parse().map_err(|_| parse_err("final_residual"))?,
            dofs_total: f[9].parse().map_err(|_| parse_err("dofs_total"))?,
            setup_s: f[10].parse().map_err(|_| parse_err("setup_s"))?,
            solve_s: f[11].parse().map_err(|_| parse_err("solve_s"))?,
        })
    }
}

/// Everything needed to run solves on one grid.
pub struct ProblemSetup {
    pub grid: StructuredGrid,
    pub dofmap: DofMap,
    pub sets: DecompositionSets,
    pub a: Arc<SparseSpd>,
    pub b: Vec<f64>,
}

/// Assembles the system, load and decomposition sets for one configuration.
/// The load always comes from the fixed manufactured forcing with unit
/// coefficients, also in the jump experiments.
pub fn build_problem(
    problem: Problem,
    n: usize,
    m: usize,
    jump: JumpRegion,
    coeff_inside: f64,
) -> Result<ProblemSetup, Error> {
    let grid = crate::mesh::build_grid(n, m)?;
    let dofmap = DofMap::new(problem.family(), grid.fine());
    let coeffs = match jump {
        JumpRegion::None => CoefficientField::constant(&grid.fine(), 1.0, 1.0)?,
        region => jump_coefficient(&grid, region, coeff_inside, 1.0)?,
    };
    let a = Arc::new(assemble(&dofmap, &coeffs)?);
    let b = assemble_rhs(&dofmap, problem.manufactured());
    let sets = build_decomposition_sets(&grid, &dofmap)?;
    Ok(ProblemSetup { grid, dofmap, sets, a, b })
}

/// Runs PCG for one configuration and reports the row.
pub fn run_single(
    problem: Problem,
    precond: PrecondKind,
    n: usize,
    m: usize,
    jump: JumpRegion,
    coeff_inside: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ResultRow, Error> {
    let setup = build_problem(problem, n, m, jump, coeff_inside)?;
    let t0 = Instant::now();
    let prec: Box<dyn Preconditioner> = match precond {
        PrecondKind::None => Box::new(IdentityPreconditioner(setup.a.dim)),
        PrecondKind::B1 => {
            Box::new(setup_b1(Arc::clone(&setup.a), &setup.grid, &setup.dofmap, &setup.sets)?)
        }
        PrecondKind::B2 => Box::new(setup_b2(
            Arc::clone(&setup.a),
            &setup.grid,
            &setup.dofmap,
            &setup.sets,
            InterfaceMode::Graded,
        )?),
        PrecondKind::ExactInterfaceB2 => Box::new(setup_b2(
            Arc::clone(&setup.a),
            &setup.grid,
            &setup.dofmap,
            &setup.sets,
            InterfaceMode::Exact,
        )?),
    };
    let setup_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (_, report) = pcg(&setup.a, &setup.b, |r| prec.apply(r), tol, max_iter);
    let solve_s = t1.elapsed().as_secs_f64();
    Ok(ResultRow {
        problem: problem.name().into(),
        precond: precond.name().into(),
        n,
        m,
        jump: jump_name(jump).into(),
        coeff_inside,
        iterations: report.iterations,
        converged: report.converged,
        final_residual: report.final_residual(),
        dofs_total: setup.a.dim,
        setup_s,
        solve_s,
    })
}

/// Runs the full experiment grid of a config: one row per (n, m) combination.
/// Non-convergence is recorded in-row, never fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, Error> {
    cfg.validate()?;
    let problem = Problem::parse(&cfg.problem)?;
    let precond = PrecondKind::parse(&cfg.preconditioner)?;
    let jump = parse_jump(&cfg.jump)?;
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &m in &cfg.m {
            rows.push(run_single(
                problem,
                precond,
                n,
                m,
                jump,
                cfg.coeff_inside,
                cfg.tol,
                cfg.max_iter,
            )?);
        }
    }
    if let Some(path) = &cfg.out {
        let mut file = std::fs::File::create(path)?;
        write_csv(&rows, &mut file)?;
    }
    Ok(rows)
}

/// Writes rows as flat CSV.
pub fn write_csv<W: Write>(rows: &[ResultRow], w: &mut W) -> Result<(), Error> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv_line())?;
    }
    Ok(())
}

/// Parses a flat CSV produced by [`write_csv`].
pub fn read_csv<R: BufRead>(r: &mut R) -> Result<Vec<ResultRow>, Error> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Io("empty CSV".into()))??;
    if header.trim_end() != CSV_HEADER {
        return Err(Error::Io("unexpected CSV header".into()));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(ResultRow::from_csv_line(&line)?);
    }
    Ok(rows)
}

/// Table layout for [`emit_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableLayout {
    /// Iteration counts pivoted as m rows × n columns.
    PaperStyle,
    /// One CSV row per run.
    FlatCsv,
}

impl TableLayout {
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "paper-style" => Ok(TableLayout::PaperStyle),
            "flat-csv" => Ok(TableLayout::FlatCsv),
            other => Err(Error::Config(format!("unknown layout '{other}'"))),
        }
    }
}

/// Formats result rows as a table. The paper-style pivot requires all rows to
/// come from the same experiment family (problem, preconditioner, jump and
/// coefficient).
pub fn emit_table<W: Write>(
    rows: &[ResultRow],
    layout: TableLayout,
    w: &mut W,
) -> Result<(), Error> {
    match layout {
        TableLayout::FlatCsv => write_csv(rows, w),
        TableLayout::PaperStyle => {
            if let Some(first) = rows.first() {
                let same = rows.iter().all(|r| {
                    r.problem == first.problem
                        && r.precond == first.precond
                        && r.jump == first.jump
                        && r.coeff_inside == first.coeff_inside
                });
                if !same {
                    return Err(Error::Config(
                        "paper-style layout requires rows from one experiment family".into(),
                    ));
                }
            }
            let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
            ns.sort_unstable();
            ns.dedup();
            let mut ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
            ms.sort_unstable();
            ms.dedup();
            write!(w, "m\\n")?;
            for n in &ns {
                write!(w, ",{n}")?;
            }
            writeln!(w)?;
            for &m in &ms {
                write!(w, "{m}")?;
                for &n in &ns {
                    match rows.iter().find(|r| r.m == m && r.n == n) {
                        Some(r) => write!(w, ",{}", r.iterations)?,
                        None => write!(w, ",")?,
                    }
                }
                writeln!(w)?;
            }
            Ok(())
        }
    }
}

/// One row of the coarsening-accuracy experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table13Row {
    pub problem: String,
    /// Mesh size denominator (h = 1/denom).
    pub h_denom: usize,
    /// Relative l² error of the coarsened interface solution.
    pub err: f64,
}

/// The two-subdomain coarsening-accuracy experiment on the box
/// `[0,2]×[0,1]×[0,1]` split at `x = 1`, with unit coefficients: compares the
/// coarsened interface solution against the exact local interface solve, with
/// the right side produced by the same residual path the preconditioner uses.
pub fn run_table13_experiment(
    problem: Problem,
    h_denoms: &[usize],
) -> Result<Vec<Table13Row>, Error> {
    let mut out = Vec::new();
    for &m in h_denoms {
        if m < 2 {
            return Err(Error::Config(format!("h denominator must be at least 2, got {m}")));
        }
        let grid = BoxGrid::new([2 * m, m, m], 1.0 / m as f64)?;
        let dofmap = DofMap::new(problem.family(), grid);
        let coeffs = CoefficientField::constant(&grid, 1.0, 1.0)?;
        let a = assemble(&dofmap, &coeffs)?;
        let b = assemble_rhs(&dofmap, problem.manufactured());

        // split the free dofs at the plane x = m
        let mut side = [Vec::new(), Vec::new()];
        let mut interface = Vec::new();
        for free in 0..dofmap.free_dofs {
            match dofmap.entity(dofmap.full_index(free)) {
                Entity::Node { p, .. } => {
                    if p[0] == m {
                        interface.push(free);
                    } else {
                        side[(p[0] > m) as usize].push(free);
                    }
                }
                Entity::Edge { axis, origin } => {
                    if axis != 0 && origin[0] == m {
                        interface.push(free);
                    } else if axis == 0 {
                        side[(origin[0] >= m) as usize].push(free);
                    } else {
                        side[(origin[0] > m) as usize].push(free);
                    }
                }
            }
        }

        // subdomain solves and the interface residual
        let mut u_loc = vec![0.0; dofmap.free_dofs];
        for dofs in &side {
            let block = extract_principal_submatrix(&a, dofs)?;
            let fact = Factorization::new(&block)?;
            let rhs: Vec<f64> = dofs.iter().map(|&d| b[d]).collect();
            for (&d, v) in dofs.iter().zip(fact.solve(&rhs)) {
                u_loc[d] = v;
            }
        }
        let au = a.mul_vec_alloc(&u_loc);
        let b_f: Vec<f64> = interface.iter().map(|&d| b[d] - au[d]).collect();

        // exact local interface solve on the full region
        let region: Vec<usize> = (0..dofmap.free_dofs).collect();
        let full = extract_principal_submatrix(&a, &region)?;
        let fact = Factorization::new(&full)?;
        let mut rhs = vec![0.0; dofmap.free_dofs];
        for (i, &d) in interface.iter().enumerate() {
            rhs[d] = b_f[i];
        }
        let x_full = fact.solve(&rhs);
        let x_exact: Vec<f64> = interface.iter().map(|&d| x_full[d]).collect();

        // coarsened solve through the graded prolongation
        let spec = FaceRegionSpec {
            axis: 0,
            plane: m,
            t_lo: [0, 0],
            m,
            region_dofs: region,
            interface_dofs: interface.clone(),
        };
        let rp = graded_face_prolongation(&dofmap, &spec, Grading::Geometric);
        let coarse = triple_product(&rp.p, &a)?;
        let cfact = Factorization::new(&coarse)?;
        let mut crhs = vec![0.0; coarse.dim];
        for (i, &col) in rp.interface_cols.iter().enumerate() {
            crhs[col] = b_f[i];
        }
        let y = cfact.solve(&crhs);
        let x_coarse: Vec<f64> = rp.interface_cols.iter().map(|&c| y[c]).collect();

        let diff: Vec<f64> =
            x_exact.iter().zip(&x_coarse).map(|(a, b)| a - b).collect();
        let err = norm2(&diff) / norm2(&x_exact);
        out.push(Table13Row { problem: problem.name().into(), h_denom: m, err });
    }
    Ok(out)
}

/// Writes the dof-reduction report as CSV.
pub fn write_coarsening_csv<W: Write>(
    entries: &[(ElementFamily, CoarseningEntry)],
    w: &mut W,
) -> Result<(), Error> {
    writeln!(w, "family,solver,d_h,kept,full,ratio,identity_fallback")?;
    for (fam, e) in entries {
        let fam = match fam {
            ElementFamily::ElasticityNodal => "elasticity",
            ElementFamily::MaxwellEdge => "maxwell",
        };
        writeln!(
            w,
            "{},{},{},{},{},{:.4},{}",
            fam, e.solver, e.m, e.kept, e.full, e.ratio, e.identity_fallback
        )?;
    }
    Ok(())
}
