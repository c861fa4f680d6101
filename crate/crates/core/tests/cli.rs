use std::fs;
use std::process::{Command, Output};

fn klac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, body: &str) -> String {
    let dir = std::env::temp_dir().join(format!("klac-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bounds_prints_single_value() {
    let o = klac(&["bounds", "--T", "4", "--n", "15", "--k", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "5\n");
    let o = klac(&[
        "bounds", "--T", "4", "--n-expr", "2^T-1", "--k-min", "2", "--k-max", "3",
    ]);
    assert_eq!(stdout(&o), "T,n,k,lower_bound\n4,15,2,5\n4,15,3,5\n");
}

#[test]
fn construct_universal_schemes() {
    let o = klac(&["construct", "--T", "2", "--k", "2", "--n", "3"]);
    assert_eq!(stdout(&o), "10\n01\n");
    let o = klac(&["construct", "--T", "8", "--k", "3", "--n", "1000"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 17);
    assert_eq!(rows[1], "01000000");
    assert_eq!(rows[9], "00001100");
    assert_eq!(rows[15], "00000010");
}

#[test]
fn construct_graph_scheme_from_file() {
    let d = scratch(
        "d.txt",
        "# clients\n100000\n010000\n001000\n000100\n000010\n000001\n111100\n111010\n110011\n",
    );
    let csv = scratch("a.csv", "");
    let o = klac(&[
        "construct",
        "--k",
        "2",
        "--input",
        &d,
        "--scheme",
        "branch-search",
        "--assignment",
        &csv,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 6);
    let assignment = fs::read_to_string(&csv).unwrap();
    assert!(assignment.starts_with("client_id,row_count,rows\n"));
    assert_eq!(assignment.lines().count(), 10);

    let o = klac(&["construct", "--k", "2", "--input", &d, "--scheme", "nested"]);
    assert_eq!(o.status.code(), Some(3));
    let o = klac(&["construct", "--k", "3", "--input", &d, "--scheme", "scr"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_two() {
    let o = klac(&["bounds", "--T", "4", "--n", "15", "--k", "9"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    let bad = scratch("bad.txt", "101\n01\n");
    let o = klac(&["construct", "--k", "2", "--input", &bad, "--scheme", "scr"]);
    assert_eq!(o.status.code(), Some(2));
    let o = klac(&["construct", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn privacy_row() {
    let o = klac(&["privacy", "--m", "4", "--T", "2", "--k", "1"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "m,T,k,side_info_size,entropy_exact,entropy_approx,mil_upper_exact,mil_upper_asymptotic,mil_conventional_lower"
    );
    assert!(lines.next().unwrap().starts_with("4,2,1,0,2.807354922"));
}

#[test]
fn simulate_reports_every_client() {
    let o = klac(&[
        "simulate", "--T", "6", "--n", "20", "--k", "2", "--F", "32", "--seed", "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 20);
    assert!(text.contains("C_k,C,T,T_k,k\n"));

    let inst = scratch("inst.txt", "5 4\n1 : 2\n2 : 1\n3 : 4\n4 : 3\n");
    let o = klac(&["simulate", "--k", "1", "--input", &inst, "--scheme", "scheme1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_is_reproducible() {
    let args = [
        "sweep",
        "--experiment",
        "fig9",
        "--n",
        "8,20",
        "--instances",
        "5",
        "--seed",
        "3",
    ];
    let a = stdout(&klac(&args));
    assert_eq!(a, stdout(&klac(&args)));
    assert!(a.starts_with("experiment,T,k,n,scheme,stat,value,seed,instances\nfig9,6,2,8,scr,mean,"));
    let fig4 = stdout(&klac(&["sweep", "--experiment", "fig4", "--n-expr", "T^2"]));
    assert!(fig4.contains("fig4,20,15,400,scheme1,value,21,1,1\n"));
    assert!(fig4.contains("fig4,20,20,400,scheme1,value,20,1,1\n"));
}
