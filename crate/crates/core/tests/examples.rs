//! Every example runs to completion.

mod progress_coefficients {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/progress_coefficients.rs"));
}

#[test]
fn progress_coefficients_runs() {
    progress_coefficients::run_example().unwrap();
}

mod progress_rate {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/progress_rate.rs"));
}

#[test]
fn progress_rate_runs() {
    progress_rate::run_example().unwrap();
}

mod csa_dynamics {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/csa_dynamics.rs"));
}

#[test]
fn csa_dynamics_runs() {
    csa_dynamics::run_example().unwrap();
}

mod sa_dynamics {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sa_dynamics.rs"));
}

#[test]
fn sa_dynamics_runs() {
    sa_dynamics::run_example().unwrap();
}

mod iteration_schemes {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/iteration_schemes.rs"));
}

#[test]
fn iteration_schemes_runs() {
    iteration_schemes::run_example().unwrap();
}

mod closed_form_gamma {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/closed_form_gamma.rs"));
}

#[test]
fn closed_form_gamma_runs() {
    closed_form_gamma::run_example().unwrap();
}

mod sa_balance {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sa_balance.rs"));
}

#[test]
fn sa_balance_runs() {
    sa_balance::run_example().unwrap();
}

mod one_generation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/one_generation.rs"));
}

#[test]
fn one_generation_runs() {
    one_generation::run_example().unwrap();
}

mod measure_gamma {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/measure_gamma.rs"));
}

#[test]
fn measure_gamma_runs() {
    measure_gamma::run_example().unwrap();
}

mod instability {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/instability.rs"));
}

#[test]
fn instability_runs() {
    instability::run_example().unwrap();
}

mod reproducible_streams {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reproducible_streams.rs"));
}

#[test]
fn reproducible_streams_runs() {
    reproducible_streams::run_example().unwrap();
}

mod figure_data {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/figure_data.rs"));
}

#[test]
fn figure_data_runs() {
    let dir = tempfile::tempdir().unwrap();
    figure_data::run_in(dir.path().to_path_buf()).unwrap();
    assert!(dir.path().join("fig1").join("manifest.txt").exists());
}
