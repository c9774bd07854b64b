use pscnn::datapath::{run_layer, OutputFormat};
use pscnn::mapper::{predict_stats, LayerSpec};
use pscnn::synth::{synth_tensor, Distribution};

fn layer() -> LayerSpec {
    // 16 filters, 32 output columns: every issued slot is active.
    LayerSpec::conv(8, 34, 34, 16, (3, 3)).with_bits(7, 7)
}

#[test]
fn guarded_fraction_follows_independent_sparsity() {
    let spec = layer().with_guarding(true);
    for (zw, zp) in [(0.19, 0.89), (0.5, 0.5), (0.04, 0.72), (0.0, 0.3)] {
        let w = synth_tensor(&spec.weight_dims(), 7, zw, 11, Distribution::Uniform).unwrap();
        let i = synth_tensor(&spec.image_dims(), 7, zp, 12, Distribution::Uniform).unwrap();
        let s = run_layer(&spec, &w, &i, OutputFormat { bits: 16, exponent: 0 }).unwrap().stats;
        let total = s.executed_macs + s.guarded_macs;
        assert!(total >= 1_000_000, "{total}");
        let expect = 1.0 - (1.0 - zw) * (1.0 - zp);
        let got = s.guarded_macs as f64 / total as f64;
        assert!((got - expect).abs() < 0.03, "zw {zw} zp {zp}: {got} vs {expect}");
    }
}

#[test]
fn guarding_changes_counts_not_outputs_or_cycles() {
    let spec = layer();
    let w = synth_tensor(&spec.weight_dims(), 7, 0.3, 1, Distribution::Laplace).unwrap();
    let i = synth_tensor(&spec.image_dims(), 7, 0.7, 2, Distribution::Uniform).unwrap();
    let out = OutputFormat { bits: 7, exponent: 5 };
    let off = run_layer(&spec.clone().with_guarding(false), &w, &i, out).unwrap();
    let on = run_layer(&spec.clone().with_guarding(true), &w, &i, out).unwrap();
    assert_eq!(on.output, off.output);
    assert_eq!(on.stats.cycles, off.stats.cycles);
    assert_eq!(on.stats.executed_macs + on.stats.guarded_macs, off.stats.executed_macs);
    assert_eq!(off.stats.guarded_macs, 0);
    assert_eq!(off.stats.flag_bits, 0);
    assert_eq!(on.stats.flag_bits, 32 * on.stats.cycles);
    assert!(on.stats.sram_reads < off.stats.sram_reads);
    assert_eq!(
        on.stats.sram_reads + on.stats.suppressed_words(),
        off.stats.sram_reads
    );
}

#[test]
fn counts_match_the_closed_form_schedule() {
    for spec in [
        layer(),
        LayerSpec::conv(3, 40, 61, 20, (11, 11)).with_stride(4, 4).with_bits(7, 4),
        LayerSpec::conv(6, 9, 9, 10, (3, 3)).with_pad(1).with_groups(2).with_bits(8, 9),
    ] {
        let w = synth_tensor(&spec.weight_dims(), spec.weight_bits, 0.0, 1, Distribution::Uniform).unwrap();
        let i = synth_tensor(&spec.image_dims(), spec.image_bits, 0.0, 2, Distribution::Uniform).unwrap();
        let s = run_layer(&spec, &w, &i, OutputFormat { bits: 16, exponent: 20 }).unwrap().stats;
        let p = predict_stats(&spec).unwrap();
        assert_eq!(s.cycles, p.cycles);
        assert_eq!(s.executed_macs, p.executed_macs);
        assert_eq!(s.pixel_words, p.pixel_words);
        assert_eq!(s.weight_words, p.weight_words);
        assert_eq!(s.useful_macs, spec.dense_macs());
    }
}

#[test]
fn runs_are_deterministic() {
    let spec = layer().with_guarding(true);
    let w = synth_tensor(&spec.weight_dims(), 7, 0.2, 3, Distribution::Laplace).unwrap();
    let i = synth_tensor(&spec.image_dims(), 7, 0.8, 4, Distribution::Uniform).unwrap();
    let out = OutputFormat { bits: 7, exponent: 4 };
    assert_eq!(run_layer(&spec, &w, &i, out).unwrap(), run_layer(&spec, &w, &i, out).unwrap());
}
