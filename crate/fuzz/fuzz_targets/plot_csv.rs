#![no_main]

use libfuzzer_sys::fuzz_target;
use mobius_sense::plot::{read_plot_data, render_svg, XAxis};

fuzz_target!(|data: &[u8]| {
    for x in [XAxis::Degree, XAxis::Rho, XAxis::CondInfA] {
        for bounds in [false, true] {
            // Neither CSV extraction nor rendering may panic, whatever the
            // cell contents (NaN, infinities, negatives on log axes, ...).
            if let Ok(plot) = read_plot_data(data, x, bounds) {
                let _ = render_svg(&plot);
            }
        }
    }
});
