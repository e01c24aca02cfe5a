use thorin_lab::bernstein::{psi_closed, SubordinatorFamily};
use thorin_lab::mixing_laws::MixingLaw;

fn main() {
    let fam = SubordinatorFamily::Ggc {
        t: 1.0,
        mixing: MixingLaw::GAlpha(0.5),
    };
    let v = psi_closed(&fam, 1.0).unwrap();
    println!("psi_G(1) per unit mass      = {v:.17}");
    println!("(1-a)*psi_G(1)              = {:.17}", 0.5 * v);
    println!("log(1+sqrt(2))              = {:.17}", (1.0 + 2f64.sqrt()).ln());
    let arc = SubordinatorFamily::Ggc {
        t: 1.0,
        mixing: MixingLaw::ArcSine,
    };
    println!("psi_arcsine(1)              = {:.17}", psi_closed(&arc, 1.0).unwrap());
}
