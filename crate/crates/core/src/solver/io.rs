use std::io::{Read, Write};

use num_complex::Complex64;

use super::{EquationForm, SolverConfig, SolverError};
use crate::semigroup::Trajectory;
use crate::spectral::{Grid, SpectralField};

/// Leading record of a trajectory file.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryHeader {
    pub n: u64,
    pub box_length: f64,
    pub nu: f64,
    pub alpha: f64,
    pub amplitude: f64,
    pub dt: f64,
    pub equation_form: EquationForm,
    pub count: u64,
}

/// Little-endian layout: `n`, `L`, `ν`, `α`, `A`, `dt`, form code, snapshot
/// count, then per snapshot the time and the `n²` coefficients row-major as
/// `(re, im)` pairs. Integers are `u64`, reals `f64`.
pub fn write_trajectory<W: Write>(mut w: W, traj: &Trajectory, cfg: &SolverConfig) -> Result<(), SolverError> {
    let g = traj.grid();
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    for v in [g.box_length(), cfg.nu, cfg.alpha, cfg.amplitude, cfg.dt] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&cfg.equation_form.code().to_le_bytes())?;
    w.write_all(&(traj.len() as u64).to_le_bytes())?;
    for (t, f) in traj.times().iter().zip(traj.fields()) {
        w.write_all(&t.to_le_bytes())?;
        for c in f.coeffs().iter() {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn word<R: Read>(r: &mut R) -> Result<[u8; 8], SolverError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_trajectory<R: Read>(mut r: R) -> Result<(TrajectoryHeader, Trajectory), SolverError> {
    let n = u64::from_le_bytes(word(&mut r)?);
    let mut real = || -> Result<f64, SolverError> { Ok(f64::from_le_bytes(word(&mut r)?)) };
    let (box_length, nu, alpha, amplitude, dt) = (real()?, real()?, real()?, real()?, real()?);
    let code = u64::from_le_bytes(word(&mut r)?);
    let equation_form = EquationForm::from_code(code).ok_or_else(|| SolverError::Format(format!("unknown equation form {code}")))?;
    let count = u64::from_le_bytes(word(&mut r)?);
    if n > 1 << 14 {
        return Err(SolverError::Format(format!("implausible grid size {n}")));
    }
    let grid = Grid::new(n as usize, box_length)?;
    let mut times = Vec::new();
    let mut fields = Vec::new();
    for _ in 0..count {
        times.push(f64::from_le_bytes(word(&mut r)?));
        let mut f = SpectralField::zeros(&grid);
        for c in f.coeffs_mut().iter_mut() {
            let re = f64::from_le_bytes(word(&mut r)?);
            let im = f64::from_le_bytes(word(&mut r)?);
            *c = Complex64::new(re, im);
        }
        fields.push(f);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(SolverError::Format("trailing bytes after last snapshot".into()));
    }
    let header = TrajectoryHeader {
        n,
        box_length,
        nu,
        alpha,
        amplitude,
        dt,
        equation_form,
        count,
    };
    Ok((header, Trajectory::new(times, fields)?))
}
