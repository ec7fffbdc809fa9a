//! Compiles and runs a small C program against the committed header and the
//! built static library, proving the header matches the ABI.

use std::path::PathBuf;
use std::process::Command;

const SMOKE_C: &str = r#"
#include "mfgibbs.h"
#include <math.h>
#include <stdlib.h>

int main(void) {
  MfgModel *model = NULL;
  if (mfg_model_builtin("rb:logistic-flux", 2.0, &model) != MfgOk) return 1;

  double coords[2] = {-1.0, 1.0};
  double energy = 0.0;
  if (mfg_configuration_energy(model, coords, 2, 1, &energy) != MfgOk) return 2;
  if (fabs(energy - 0.5) > 1e-12) return 3;

  double xs[2] = {-1.0, 1.0}, ys[2] = {4.0, 6.0}, d = -1.0;
  if (mfg_quotient_distance_1d(xs, 2, ys, 2, 0, 2.0, &d) != MfgOk) return 4;
  if (d > 1e-9) return 5;

  MfgDensity *density = NULL;
  if (mfg_stationary_density(model, -30.0, 30.0, 2000, &density) != MfgOk) return 6;
  if (fabs(mfg_density_free_energy(density) + 1.0) > 1e-3) return 7;

  MfgSampleSet *samples = NULL;
  if (mfg_sample_equilibrium(model, 4, 0.0, 100, 1, 20, 1, 7, &samples) != MfgOk) return 8;
  if (mfg_samples_count(samples) != 20) return 9;
  double row[4];
  if (mfg_samples_row(samples, 0, row, 4) != MfgOk) return 10;

  MfgModel *bad = NULL;
  if (mfg_model_builtin("nope", 2.0, &bad) != MfgInvalidArgument) return 11;

  mfg_samples_free(samples);
  mfg_density_free(density);
  mfg_model_free(model);
  return 0;
}
"#;

fn static_lib() -> PathBuf {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = manifest.join("../../target");
    for profile in ["debug", "release"] {
        let candidate = target.join(profile).join("libmfgibbs_ffi.a");
        if candidate.exists() {
            return candidate;
        }
    }
    panic!("libmfgibbs_ffi.a not found under {}", target.display());
}

#[test]
fn header_matches_abi() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("smoke.c");
    std::fs::write(&source, SMOKE_C).unwrap();
    let binary = dir.path().join("smoke");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");

    let compile = Command::new("cc")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&source)
        .arg(static_lib())
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&binary)
        .output()
        .expect("a C compiler is required for the ABI smoke test");
    assert!(
        compile.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&binary).status().unwrap();
    assert_eq!(run.code(), Some(0));
}
