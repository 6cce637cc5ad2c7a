use thermal_ir::oneloop::*;
use thermal_ir::params::ThermalParams;

fn main() {
    let p = ThermalParams::default();
    let fp = solve_thermal_regulator(p.beta, p.e, 1.0).unwrap();
    println!("E = {:.8e} (closed {:.8e}, iters {})", fp.value, fp.closed_form, fp.iterations);
    let t0 = std::time::Instant::now();
    let j2a = j2_asymptotic(&p, fp.value).unwrap();
    println!("J2 asym = {:.8e} ({:.1?})", j2a.re, t0.elapsed());
    let t0 = std::time::Instant::now();
    let j2n = j2_continued(&p, fp.value).unwrap();
    println!("J2 cont = {:.8e} + {:.3e}i  rel-to-(-e): {:.4e} ({:.1?})", j2n.re, j2n.im, (j2n.re + p.e).abs()/p.e, t0.elapsed());
    let t0 = std::time::Instant::now();
    let j3n = j3_numeric(&p).unwrap();
    println!("J3 num = {:.8e}, 2e = {:.8e}, rel {:.4e} ({:.1?})", j3n.re, 2.0*p.e, (j3n.re - 2.0*p.e).abs()/(2.0*p.e), t0.elapsed());
    let rep = coulomb_nullification_numeric(&p).unwrap();
    println!("nullify numeric: total/e = {:.4e}", rep.total_over_e);
    let rep = coulomb_nullification_asym(&p).unwrap();
    println!("nullify asym: total/e = {:.4e}", rep.total_over_e);
}
