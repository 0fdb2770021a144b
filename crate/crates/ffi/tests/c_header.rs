//! Compiles and runs a small C program against the generated header and the
//! static library. Skipped when no C compiler or static archive is around.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "qgelab.h"

int main(void) {
    QgeMatrix *m = NULL;
    if (qge_matrix_sample_ginibre(3, 1, 0, 0, &m) != QGE_STATUS_OK) return 1;
    double eig[6];
    if (qge_matrix_spectrum(m, eig, 3) != QGE_STATUS_OK) return 2;
    if (qge_matrix_spectrum(m, eig, 2) != QGE_STATUS_BUFFER_TOO_SMALL) return 3;
    char *err = qge_last_error();
    if (err == NULL) return 4;
    qge_string_free(err);
    qge_matrix_free(m);
    double pf[2], a[8] = {0, 0, 3, 0, -3, 0, 0, 0};
    if (qge_pfaffian(a, 2, pf) != QGE_STATUS_OK || pf[0] != 3.0) return 5;
    printf("ok %s\n", qge_version());
    return 0;
}
"#;

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc)
        .arg("--version")
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|_| cc)
}

fn archive() -> Option<PathBuf> {
    // tests live in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let p = exe.parent()?.parent()?.join("libqgelab_ffi.a");
    p.exists().then_some(p)
}

#[test]
fn header_compiles_and_links() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("qgelab.h").exists(), "header not generated");
    let Some(cc) = compiler() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("smoke.c");
    std::fs::write(&src, PROGRAM).unwrap();

    let syntax = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        syntax.status.success(),
        "{}",
        String::from_utf8_lossy(&syntax.stderr)
    );

    let Some(lib) = archive() else {
        eprintln!("static library not found, skipping link step");
        return;
    };
    let bin = dir.join("smoke");
    let link = Command::new(&cc)
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        link.status.success(),
        "{}",
        String::from_utf8_lossy(&link.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
