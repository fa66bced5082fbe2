use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn srl(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_srl"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .arg("--threads")
        .arg("1")
        .args(args)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_srl")).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = srl(dir.path(), r#"{"bc": "neumann", "mu": 3.0}"#, &["mesh"]);
    assert_eq!(out.status.code(), Some(2));
    let out = srl(dir.path(), r#"{"no_such_field": 1}"#, &["mesh"]);
    assert_eq!(out.status.code(), Some(2));
    let out = srl(dir.path(), r#"{"lambda": {"args": [2.5]}}"#, &["mesh"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_needs_five_lambdas() {
    let dir = tempfile::tempdir().unwrap();
    let out = srl(dir.path(), r#"{"level": 1, "lambda": {"count": 3}}"#, &["sweep"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mesh_file_has_header_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = srl(dir.path(), r#"{"id": "sq", "level": 1}"#, &["mesh"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(dir.path(), "sq_mesh.tmesh");
    assert!(text.starts_with("# config_hash="));
    let mesh = srl_core::geometry::read_tmesh(&text).unwrap();
    assert_eq!(mesh.n_triangles(), 8);
    assert_eq!(mesh.n_nodes(), 9);

    // the written mesh is accepted as a domain
    let path = dir.path().join("sq_mesh.tmesh");
    let cfg = format!(r#"{{"id": "again", "level": 0, "domain": "{}"}}"#, path.display());
    let out = srl(dir.path(), &cfg, &["mesh"]);
    assert!(out.status.success());
    let again = read(dir.path(), "again_mesh.tmesh");
    assert_eq!(again.lines().skip(1).collect::<Vec<_>>(), text.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn solve_with_zero_force_gives_zero_norms() {
    let dir = tempfile::tempdir().unwrap();
    let out = srl(dir.path(), r#"{"id": "z", "level": 2, "force": {"kind": "zero"}}"#, &["solve"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(dir.path(), "z_solve.json");
    for k in ["velocity_l2", "velocity_gradient_l2", "pressure_l2"] {
        assert_eq!(v["norms"][k].as_f64(), Some(0.0), "{k}");
    }
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(v["version"].is_string());
}

#[test]
fn solve_exports_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let coo = dir.path().join("k.coo");
    let out = srl(
        dir.path(),
        r#"{"id": "d", "level": 1, "bc": "dirichlet", "force": {"kind": "curl", "k": 1}}"#,
        &["solve", "--export-coo", coo.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(coo).unwrap();
    assert!(text.starts_with("# config_hash="));
    let v = json(dir.path(), "d_solve.json");
    assert!(v["norms"]["velocity_l2"].as_f64().unwrap() > 0.0);
    assert!(v["momentum_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn convergence_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = srl(dir.path(), r#"{"id": "c", "bc": "dirichlet", "levels": [1, 2, 3, 4]}"#, &["convergence"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(dir.path(), "c_convergence.csv");
    let last = text.lines().last().unwrap();
    let velocity_order: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
    assert!(velocity_order >= 2.5, "{velocity_order}");
}

#[test]
fn neumann_sweep_fit_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"id": "n", "level": 4, "lambda": {"log10_min": 0, "log10_max": 2.5, "count": 11}}"#;
    let out = srl(dir.path(), cfg, &["sweep"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = json(dir.path(), "n_fit.json");
    let a = fit["alpha_hat"].as_f64().unwrap();
    assert!(a > 0.0 && a < 1.0, "alpha_hat {a}");
    for k in ["r2", "window_min", "window_max", "n_samples", "config_hash", "version"] {
        assert!(!fit[k].is_null(), "{k}");
    }
    let csv = read(dir.path(), "n_sweep.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "abs_lambda,arg_lambda,h,C_pressure,C_velocity,C_gradient,Cp_p3,Cp_p4,resolved");
}

#[test]
fn outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = r#"{"id": "r", "level": 4, "lambda": {"log10_min": 0, "log10_max": 2, "count": 5}}"#;
    for d in [&a, &b] {
        assert!(srl(d.path(), cfg, &["sweep", "--kind", "uniform"]).status.success());
        assert!(srl(d.path(), cfg, &["sweep"]).status.success());
    }
    for f in ["r_sweep.csv", "r_fit.json", "config.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn grisvard_and_local_checks_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = srl(dir.path(), r#"{"id": "g"}"#, &["check-grisvard"]);
    assert!(out.status.success());
    let text = read(dir.path(), "g_grisvard.csv");
    assert_eq!(text.lines().nth(1), Some("id,lhs,rhs,ratio"));
    assert_eq!(text.lines().count(), 2 + 23);

    let cfg = r#"{"id": "l", "level": 4, "force": {"kind": "bump", "center": [0, 0], "radius": 0.3},
                  "lambda": {"log10_min": 1, "log10_max": 2, "count": 2}}"#;
    let out = srl(dir.path(), cfg, &["check-local"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path(), "l_local.csv").lines().count(), 2 + 6);

    // support reaching into the patch cover is rejected
    let cfg = r#"{"id": "bad", "level": 3, "force": {"kind": "bump", "center": [0.9, 0.9], "radius": 0.05}}"#;
    assert_eq!(srl(dir.path(), cfg, &["check-local"]).status.code(), Some(2));
}

#[test]
fn h2_rejects_mu_at_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = srl(dir.path(), r#"{"mu": 0.42, "level": 1}"#, &["check-h2"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = r#"{"id": "h", "mu": 0.41, "level": 2, "lambda": {"log10_min": 0, "log10_max": 1, "count": 3}}"#;
    let out = srl(dir.path(), cfg, &["check-h2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(dir.path(), "h_h2.json")["refinement_change"].is_number());
}

#[test]
fn equivalence_is_no_slip_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = srl(dir.path(), r#"{"level": 1}"#, &["check-equivalence"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = r#"{"id": "e", "bc": "dirichlet", "level": 4, "lambda": {"log10_min": 0, "log10_max": 2, "count": 5}}"#;
    let out = srl(dir.path(), cfg, &["check-equivalence"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(dir.path(), "e_equivalence.json")["gap"].is_number());
}
