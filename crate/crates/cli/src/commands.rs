//! One function per subcommand; each builds tables that are written in the requested format.

use std::io::Write as _;

use loopsoup::covering::{
    build_covering, decomposition_defect, det_factorization, green_sum_defect, lifted_green, predicted_components,
};
use loopsoup::gaussian::{gen_fn_gaussian, gen_fn_loops, isomorphism_test, scaling_sides, table_with_tail, FieldKind, TestFunctional};
use loopsoup::holonomy::{expected_holonomy, mc_expected_holonomy, HolonomyFormula};
use loopsoup::homology::{cotree_form, homology_law};
use loopsoup::networks::{
    density_powers_1, density_powers_half, enumerate_eulerian, enumerate_even, joint_density_1, joint_density_half,
    marginalize_density, prob_even_half, prob_network_1, total_jump_law, DensityVariant,
};
use loopsoup::output::Table;
use loopsoup::rng::replica_seed;
use loopsoup::sampler::{edge_network, occupation_field, sample_soup, sample_soup_wilson, LoopSoupSample};
use loopsoup::yang_mills::{convergence_experiment, Connection, FiniteConnection, U1Connection};
use loopsoup::{build_kernel, cycle_basis, enumerate_loops, green, row, Kernel, LoopMeasureTable, RepresentedGroup, WeightedGraph};

use crate::config::{load_assignment, load_graph, load_group, require_seed, CliError, CliResult};
use crate::{Command, Common, Format, GroupArgs, SampleKind, Suite, EXIT_SUITE_FAILED};

/// Output of a command: one table, or named sections for the report.
enum Output {
    Table(Table),
    Sections(Vec<(String, Table)>),
}

fn render(output: &Output, format: Format) -> String {
    match (output, format) {
        (Output::Table(t), Format::Csv) => t.to_csv(),
        (Output::Table(t), Format::Json) => pretty(&t.to_json()),
        (Output::Sections(s), Format::Csv) => {
            let mut out = String::new();
            for (name, t) in s {
                out.push_str(&format!("# {name}\n{}\n", t.to_csv()));
            }
            out
        }
        (Output::Sections(s), Format::Json) => {
            let obj: serde_json::Map<String, serde_json::Value> = s.iter().map(|(n, t)| (n.clone(), t.to_json())).collect();
            pretty(&serde_json::Value::Object(obj))
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("tables serialize");
    s.push('\n');
    s
}

fn emit(common: &Common, output: &Output) -> CliResult<()> {
    let text = render(output, common.format);
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

pub(crate) fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Check { common } => {
            let g = load_graph(&common.graph)?;
            emit(&common, &Output::Table(check_table(&g)))?;
            Ok(0)
        }
        Command::Sample { common, alpha, samples, what, cap } => {
            let g = load_graph(&common.graph)?;
            let seed = require_seed(common.seed, "sample")?;
            emit(&common, &Output::Table(sample_table(&g, alpha, samples, what, cap, seed)?))?;
            Ok(0)
        }
        Command::Verify { suite, common, group, samples, cap } => {
            let g = load_graph(&common.graph)?;
            let table = verify_table(&g, suite, &common, &group, samples, cap)?;
            let failed = table.rows.iter().any(|r| r.last().map(String::as_str) == Some("false"));
            emit(&common, &Output::Table(table))?;
            Ok(if failed { EXIT_SUITE_FAILED } else { 0 })
        }
        Command::Homology { common, alpha, grid, jmax } => {
            let g = load_graph(&common.graph)?;
            emit(&common, &Output::Table(homology_table(&g, alpha, grid, jmax)?))?;
            Ok(0)
        }
        Command::Holonomy { common, group, alpha, samples } => {
            let g = load_graph(&common.graph)?;
            let rg = load_group(&group.group)?;
            let u = load_assignment(&group.assignment, &g, &rg, common.seed)?;
            let seed = if samples > 0 { Some(require_seed(common.seed, "holonomy --samples")?) } else { None };
            emit(&common, &Output::Table(holonomy_table(&g, &rg, &u, alpha, samples, seed)?))?;
            Ok(0)
        }
        Command::Yangmills { common, group, irrep, theta, c, epsilons, cap } => {
            let g = load_graph(&common.graph)?;
            let table = match theta {
                Some(theta) => {
                    let basis = cycle_basis(&g, 0);
                    if theta.len() != basis.rank() {
                        return Err(CliError::Validation(format!(
                            "--theta needs one holonomy per fundamental cycle ({})",
                            basis.rank()
                        )));
                    }
                    let conn = U1Connection { omega: cotree_form(g.n(), &basis, &theta) };
                    yangmills_table(&g, &conn, c, &epsilons, cap)?
                }
                None => {
                    let rg = load_group(&group.group)?;
                    let u = load_assignment(&group.assignment, &g, &rg, common.seed)?;
                    let r = rg.irreps.get(irrep).ok_or_else(|| {
                        CliError::Validation(format!("--irrep {irrep} out of range ({} irreps)", rg.irreps.len()))
                    })?;
                    let conn = FiniteConnection { group: &rg.group, u: &u, irrep: r };
                    yangmills_table(&g, &conn, c, &epsilons, cap)?
                }
            };
            emit(&common, &Output::Table(table))?;
            Ok(0)
        }
        Command::Report { common, group, alpha } => {
            let g = load_graph(&common.graph)?;
            let rg = load_group(&group.group)?;
            let u = load_assignment(&group.assignment, &g, &rg, common.seed)?;
            let mut sections = vec![("graph".to_string(), check_table(&g))];
            sections.push(("lemma1".into(), lemma1_rows(&g)?));
            sections.push(("prop1".into(), prop1_rows(&g, 8)?));
            let rank = g.cycle_rank();
            if (1..=2).contains(&rank) {
                sections.push(("homology".into(), homology_table(&g, alpha, 32, 4)?));
            }
            sections.push(("holonomy".into(), holonomy_table(&g, &rg, &u, alpha, 0, None)?));
            if rank > 0 && rg.irreps.len() > 1 {
                let conn = FiniteConnection { group: &rg.group, u: &u, irrep: &rg.irreps[1] };
                match yangmills_table(&g, &conn, 1.0, &[0.2, 0.1, 0.05, 0.025], 8) {
                    Ok(t) => sections.push(("yangmills".into(), t)),
                    Err(CliError::Core(loopsoup::Error::NoPlaquette(_))) => {}
                    Err(e) => return Err(e),
                }
            }
            emit(&common, &Output::Sections(sections))?;
            Ok(0)
        }
    }
}

fn check_table(g: &WeightedGraph) -> Table {
    let k = build_kernel(g);
    let mut t = Table::new(&["property", "value"]);
    t.push(row!["vertices", g.n()]);
    t.push(row!["edges", g.edges().len()]);
    t.push(row!["components", g.component_count()]);
    t.push(row!["cycle_rank", g.cycle_rank()]);
    t.push(row!["transient", true]);
    t.push(row!["det_i_minus_p", k.det_i_minus_p()]);
    t.push(row!["minus_log_det_i_minus_p", -k.log_det_i_minus_p()]);
    t.push(row!["det_green", green(g).det()]);
    t.push(row!["spectral_radius", k.spectral_radius()]);
    for (x, l) in g.lambda().iter().enumerate() {
        t.push(row![format!("lambda[{}]", g.names()[x]), *l]);
    }
    t
}

/// The truncated table for `α ≠ 1` (or whenever a cap is given).
fn sampling_table(kernel: &Kernel, alpha: f64, cap: Option<usize>) -> CliResult<Option<LoopMeasureTable>> {
    Ok(match cap {
        Some(c) => Some(enumerate_loops(kernel, c)?),
        None if alpha == 1.0 => None,
        None => Some(table_with_tail(kernel, 1e-4)?),
    })
}

fn draw(kernel: &Kernel, table: &Option<LoopMeasureTable>, alpha: f64, seed: u64) -> LoopSoupSample {
    match table {
        Some(t) => sample_soup(t, alpha, seed),
        None => sample_soup_wilson(kernel, seed),
    }
}

fn sample_table(g: &WeightedGraph, alpha: f64, samples: usize, what: SampleKind, cap: Option<usize>, seed: u64) -> CliResult<Table> {
    if !(alpha > 0.0) {
        return Err(CliError::Validation("--alpha must be positive".into()));
    }
    let kernel = build_kernel(g);
    let table = sampling_table(&kernel, alpha, cap)?;
    let mut t = match what {
        SampleKind::Soup => Table::new(&["replica", "representative", "length", "multiplicity", "count"]),
        SampleKind::Occupation => Table::new(&["replica", "vertex", "value"]),
        SampleKind::Network => Table::new(&["replica", "from", "to", "count"]),
    };
    for r in 0..samples {
        let s = replica_seed(seed, r as u64);
        let soup = draw(&kernel, &table, alpha, s);
        match what {
            SampleKind::Soup => {
                for (c, &m) in &soup.counts {
                    t.push(row![r, c.label(g), c.len(), c.multiplicity(), m]);
                }
            }
            SampleKind::Occupation => {
                let field = occupation_field(&soup, &kernel, alpha, s);
                for (x, v) in field.values.iter().enumerate() {
                    t.push(row![r, g.names()[x].clone(), *v]);
                }
            }
            SampleKind::Network => {
                for (x, y, c) in edge_network(&soup, g.n()).nonzero() {
                    t.push(row![r, g.names()[x].clone(), g.names()[y].clone(), c]);
                }
            }
        }
    }
    Ok(t)
}

fn suite_table() -> Table {
    Table::new(&["check", "tolerance", "worst", "pass"])
}

fn check_row(t: &mut Table, name: &str, tol: f64, worst: f64) {
    t.push(row![name, tol, worst, worst <= tol]);
}

fn lemma1_rows(g: &WeightedGraph) -> CliResult<Table> {
    let mut t = suite_table();
    let (mut complex, mut real, mut sides): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for seed in 0..50 {
        let tf = TestFunctional::random(g, seed, 1.0, 1.0, false);
        let a = gen_fn_loops(g, &tf, 1.0)?;
        let b = gen_fn_gaussian(g, &tf, FieldKind::Complex)?;
        complex = complex.max((a.re / b - 1.0).abs()).max(a.im.abs() / b);
        let (l, r) = scaling_sides(g, &tf);
        sides = sides.max((l - r).norm());
        let tf = TestFunctional::random(g, 1000 + seed, 1.0, 1.0, true);
        let a = gen_fn_loops(g, &tf, 0.5)?;
        let b = gen_fn_gaussian(g, &tf, FieldKind::Real)?;
        real = real.max((a.re / b - 1.0).abs()).max(a.im.abs() / b);
    }
    check_row(&mut t, "loops_vs_complex_field_alpha_1", 1e-10, complex);
    check_row(&mut t, "loops_vs_real_field_alpha_half", 1e-10, real);
    check_row(&mut t, "scaling_side", 1e-12, sides);
    Ok(t)
}

/// Marginalization is a tensor rule over all vertices; keep it to small graphs.
const MARGINAL_MAX_VERTICES: usize = 3;

fn prop1_rows(g: &WeightedGraph, cap: u64) -> CliResult<Table> {
    let kernel = build_kernel(g);
    let mut t = suite_table();
    let nets = enumerate_eulerian(g, cap)?;
    let mass: f64 = nets.iter().map(|k| prob_network_1(g, &kernel, k)).sum::<loopsoup::Result<f64>>()?;
    let tail = 1.0 - total_jump_law(&kernel, 1.0, cap as usize).iter().sum::<f64>();
    check_row(&mut t, "network_law_plus_tail_is_one", 1e-12, (1.0 - mass - tail).abs());
    if g.n() <= MARGINAL_MAX_VERTICES {
        let mut worst: f64 = 0.0;
        for k in &nets {
            let exact = prob_network_1(g, &kernel, k)?;
            let marg = marginalize_density(&kernel, &density_powers_1(k), 8, |rho| {
                joint_density_1(g, &kernel, k, rho, DensityVariant::Corrected).unwrap_or(f64::NAN)
            });
            worst = worst.max((marg - exact).abs());
        }
        check_row(&mut t, "joint_density_marginalizes", 1e-8, worst);
    }
    Ok(t)
}

fn prop2_rows(g: &WeightedGraph, cap: u64) -> CliResult<Table> {
    let kernel = build_kernel(g);
    let mut t = suite_table();
    let nets = enumerate_even(g, cap)?;
    let mass: f64 = nets.iter().map(|m| prob_even_half(g, &kernel, m)).sum::<loopsoup::Result<f64>>()?;
    let tail = 1.0 - total_jump_law(&kernel, 0.5, cap as usize).iter().sum::<f64>();
    check_row(&mut t, "even_network_law_plus_tail_is_one", 1e-12, (1.0 - mass - tail).abs());
    if g.n() <= MARGINAL_MAX_VERTICES {
        let mut worst: f64 = 0.0;
        for m in &nets {
            let exact = prob_even_half(g, &kernel, m)?;
            let powers = density_powers_half(g, m)?;
            let marg = marginalize_density(&kernel, &powers, 8, |rho| joint_density_half(g, &kernel, m, rho).unwrap_or(f64::NAN));
            worst = worst.max((marg - exact).abs());
        }
        check_row(&mut t, "joint_density_marginalizes", 1e-8, worst);
    }
    Ok(t)
}

fn verify_table(g: &WeightedGraph, suite: Suite, common: &Common, group: &GroupArgs, samples: usize, cap: u64) -> CliResult<Table> {
    match suite {
        Suite::Lemma1 => lemma1_rows(g),
        Suite::Prop1 => prop1_rows(g, cap),
        Suite::Prop2 => prop2_rows(g, cap),
        Suite::Iso => {
            let seed = require_seed(common.seed, "verify iso")?;
            let mut t = suite_table();
            for kind in [FieldKind::Complex, FieldKind::Real] {
                let report = isomorphism_test(g, kind, samples, seed)?;
                check_row(&mut t, &format!("moments_alpha_{}_worst_abs_z", kind.alpha()), report.threshold, report.worst_z());
            }
            Ok(t)
        }
        Suite::Covering => {
            let rg = load_group(&group.group)?;
            let u = load_assignment(&group.assignment, g, &rg, common.seed)?;
            let cov = build_covering(g, &rg.group, &u)?;
            let mut t = suite_table();
            check_row(&mut t, "green_sum_over_fiber", 1e-12, green_sum_defect(g, &rg.group, &cov, &lifted_green(&cov)));
            let (lhs, rhs) = det_factorization(g, &rg, &u)?;
            check_row(&mut t, "det_factorization_relative", 1e-10, (lhs - rhs).norm() / rhs.abs());
            let predicted = predicted_components(g, &rg.group, &u);
            let actual = cov.graph.component_count();
            check_row(&mut t, "components_minus_index", 0.0, (predicted as f64 - actual as f64).abs());
            Ok(t)
        }
        Suite::Decomp => {
            let rg = load_group(&group.group)?;
            let u = load_assignment(&group.assignment, g, &rg, common.seed)?;
            let mut t = suite_table();
            check_row(&mut t, "regular_representation_decomposition", 1e-12, decomposition_defect(g, &rg, &u)?);
            Ok(t)
        }
    }
}

fn homology_table(g: &WeightedGraph, alpha: f64, grid: usize, jmax: i64) -> CliResult<Table> {
    if !(alpha > 0.0) || jmax < 0 {
        return Err(CliError::Validation("--alpha must be positive and --jmax nonnegative".into()));
    }
    let basis = cycle_basis(g, 0);
    let mut header: Vec<String> = (1..=basis.rank()).map(|i| format!("j{i}")).collect();
    header.push("probability".into());
    header.push("imag_residue".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&header);
    for (j, p) in homology_law(g, &basis, alpha, grid, jmax)? {
        let mut r: Vec<String> = j.iter().map(|v| v.to_string()).collect();
        r.extend(row![p.value, p.imag_residue]);
        t.push(r);
    }
    Ok(t)
}

fn holonomy_table(
    g: &WeightedGraph,
    rg: &RepresentedGroup,
    u: &loopsoup::covering::MAssignment,
    alpha: f64,
    samples: usize,
    seed: Option<u64>,
) -> CliResult<Table> {
    let group = &rg.group;
    let mc = match seed {
        Some(s) if samples > 0 => {
            if alpha != 1.0 {
                return Err(CliError::Validation("the Monte Carlo estimate uses Wilson's algorithm and needs --alpha 1".into()));
            }
            Some(mc_expected_holonomy(g, group, u, samples, s))
        }
        _ => None,
    };
    let mut header = vec!["class", "representative", "size", "expected", "expected_literal"];
    if mc.is_some() {
        header.extend(["mc_mean", "mc_std_error"]);
    }
    let mut t = Table::new(&header);
    for (c, members) in group.conjugacy_classes().iter().enumerate() {
        let primary = expected_holonomy(g, rg, u, alpha, c, HolonomyFormula::Primary)?;
        let literal = expected_holonomy(g, rg, u, alpha, c, HolonomyFormula::Literal)?;
        let mut r = row![c, group.names()[members[0]].clone(), members.len(), primary, literal];
        if let Some(m) = &mc {
            r.extend(row![m[c].mean, m[c].std_error()]);
        }
        t.push(r);
    }
    Ok(t)
}

fn yangmills_table(g: &WeightedGraph, conn: &dyn Connection, c: f64, epsilons: &[f64], cap: usize) -> CliResult<Table> {
    let table = enumerate_loops(&build_kernel(g), cap)?;
    let report = convergence_experiment(g, &table, conn, c, epsilons)?;
    let mut t = Table::new(&[
        "eps",
        "alpha",
        "log_lambda_alpha",
        "log_lambda_ym",
        "gap",
        "log_lambda_alpha_literal",
        "log_lambda_ym_literal",
        "gap_literal",
        "halving_ratio",
        "fitted_k",
        "fitted_order",
    ]);
    for (i, r) in report.rows.iter().enumerate() {
        let ratio = if i == 0 { String::new() } else { loopsoup::output::fmt_f64(report.halving_ratios[i - 1]) };
        let mut cells = row![
            r.eps,
            r.alpha,
            r.log_lambda_alpha.primary,
            r.log_lambda_ym.primary,
            r.gap,
            r.log_lambda_alpha.literal,
            r.log_lambda_ym.literal,
            r.gap_literal
        ];
        cells.push(ratio);
        cells.extend(row![report.fitted_k, report.fitted_order]);
        t.push(cells);
    }
    Ok(t)
}
