use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use sparse_al_ffi::*;

fn identity_problem(b: usize) -> (SaStatus, *mut SaProblem) {
    let v = [3.0, 2.0, 1.0];
    let phi = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let sigma2 = [0.0; 3];
    let mut out = ptr::null_mut();
    let status = unsafe { sa_problem_new(3, 3, v.as_ptr(), phi.as_ptr(), sigma2.as_ptr(), 0.0, 0.0, b, &mut out) };
    (status, out)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(sa_last_error_message()) }.to_string_lossy().into_owned()
}

unsafe fn weights(r: *const SaResult) -> Vec<f64> {
    let mut w = vec![0.0; sa_result_len(r)];
    assert_eq!(sa_result_weights(r, w.as_mut_ptr(), w.len()), SaStatus::Ok);
    w
}

#[test]
fn greedy_and_oracle_agree_through_the_c_interface() {
    let (status, p) = identity_problem(2);
    assert_eq!(status, SaStatus::Ok);
    unsafe {
        assert_eq!((sa_problem_m(p), sa_problem_n(p)), (3, 3));
        let mut g = ptr::null_mut();
        assert_eq!(sa_solve_greedy(p, 1.0, &mut g), SaStatus::Ok);
        let mut o = ptr::null_mut();
        assert_eq!(sa_solve_oracle(p, &mut o), SaStatus::Ok);
        assert!((sa_result_objective(g) - 1.0).abs() < 1e-12);
        assert!((sa_result_objective(o) - 1.0).abs() < 1e-9);
        let w = weights(g);
        assert!((w[0] - 3.0).abs() < 1e-12 && (w[1] - 2.0).abs() < 1e-12 && w[2] == 0.0);

        let mut sel = vec![usize::MAX; sa_result_selected_len(g)];
        assert_eq!(sa_result_selected(g, sel.as_mut_ptr(), sel.len()), SaStatus::Ok);
        assert_eq!(sel, vec![0, 1]);
        let mut short = [0usize; 1];
        assert_eq!(sa_result_selected(g, short.as_mut_ptr(), 1), SaStatus::InvalidArgument);
        assert!(last_error().contains("2 needed"));

        let mut i = ptr::null_mut();
        assert_eq!(sa_solve_iht(p, 20, 0.0, false, &mut i), SaStatus::Ok);
        assert!(weights(i).iter().filter(|x| **x > 0.0).count() <= 2);
        sa_result_free(i);
        sa_result_free(g);
        sa_result_free(o);
        sa_problem_free(p);
    }
}

#[test]
fn construction_errors_map_to_status_codes() {
    let (status, p) = identity_problem(4);
    assert_eq!(status, SaStatus::BudgetExceedsPool);
    assert!(p.is_null());
    assert!(last_error().contains("exceeds"));

    let v = [1.0, 2.0];
    let phi = [1.0; 3];
    let s = [0.0; 2];
    let mut out = ptr::null_mut();
    let status = unsafe { sa_problem_new(2, 2, v.as_ptr(), phi.as_ptr(), s.as_ptr(), -1.0, 0.0, 1, &mut out) };
    assert_eq!(status, SaStatus::InvalidArgument);

    let status = unsafe { sa_problem_new(2, 2, v.as_ptr(), phi.as_ptr(), s.as_ptr(), 0.0, 0.0, 1, ptr::null_mut()) };
    assert_eq!(status, SaStatus::NullPointer);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { sa_solve_greedy(ptr::null(), 1.0, &mut r) }, SaStatus::NullPointer);
    let (_, p) = identity_problem(2);
    unsafe {
        assert_eq!(sa_solve_greedy(p, 0.0, &mut r), SaStatus::InvalidArgument);
        assert_eq!(sa_solve_iht(p, 0, 0.0, false, &mut r), SaStatus::InvalidArgument);
        assert!(r.is_null());
        sa_problem_free(p);
    }
}

#[test]
fn oracle_refuses_large_pools() {
    let n = 60;
    let v = [1.0];
    let phi = vec![0.5; n];
    let s = vec![0.1; n];
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(sa_problem_new(1, n, v.as_ptr(), phi.as_ptr(), s.as_ptr(), 1.0, 0.0, 10, &mut p), SaStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(sa_solve_oracle(p, &mut r), SaStatus::ProblemTooLarge);
        sa_problem_free(p);
    }
}

#[test]
fn assembly_matches_hand_computation() {
    // two candidates, two labels, one dimension
    let g = [1.0, 3.0, -2.0, -2.0];
    let probs = [0.5, 0.5, 1.0, 0.0];
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(sa_problem_assemble(2, 2, 1, g.as_ptr(), probs.as_ptr(), 1.0, 0.0, 1, &mut p), SaStatus::Ok);
        assert_eq!((sa_problem_m(p), sa_problem_n(p)), (1, 2));
        // means are 2 and -2, so v = 0 and the columns are the means over b = 1;
        // only candidate 0 has spread, σ₀ = (1/2)·1 so σ₀² = 0.25
        let mut r = ptr::null_mut();
        assert_eq!(sa_solve_oracle(p, &mut r), SaStatus::Ok);
        // selecting candidate 0 with weight 0 earns −ασ₀²
        assert!((sa_result_objective(r) + 0.25).abs() < 1e-12);
        sa_result_free(r);
        sa_problem_free(p);

        let bad = [0.7, 0.7, 1.0, 0.0];
        assert_eq!(
            sa_problem_assemble(2, 2, 1, g.as_ptr(), bad.as_ptr(), 1.0, 0.0, 1, &mut p),
            SaStatus::InvalidArgument
        );
    }
}

#[test]
fn generated_header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::path::Path::new(dir).join("include/sparse_al.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["sa_problem_new", "sa_problem_assemble", "sa_solve_iht", "sa_result_selected", "SA_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"sparse_al.h\"\nint main(void) {\n  SaProblem *p = NULL;\n  SaResult *r = NULL;\n  \
         double v[1] = {1.0};\n  SaStatus s = sa_problem_new(1, 1, v, v, v, 0.0, 0.0, 1, &p);\n  \
         if (s == SA_STATUS_OK) s = sa_solve_greedy(p, 1.0, &r);\n  sa_result_free(r);\n  sa_problem_free(p);\n  \
         return (int)s;\n}\n",
    )
    .unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|cc| Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
