use pscnn::datapath::{run_layer, OutputFormat};
use pscnn::mapper::LayerSpec;
use pscnn::oracle::reference_conv;
use pscnn::selftest::{oracle_equivalence, BIT_WIDTHS};
use pscnn::synth::{synth_tensor, Distribution};

#[test]
fn two_hundred_random_layers() {
    let s = oracle_equivalence(200, 7).unwrap();
    assert!(s.passed(), "{s:?}");
}

#[test]
fn every_bit_width_pair() {
    let mut seed = 0;
    for &wb in &BIT_WIDTHS {
        for &ib in &BIT_WIDTHS {
            for (k, stride) in [(3, 1), (5, 2), (1, 4), (11, 1)] {
                seed += 1;
                let spec = LayerSpec::conv(2, 14, 30, 5, (k, k))
                    .with_stride(stride, 1)
                    .with_pad(1)
                    .with_bits(wb, ib);
                let w = synth_tensor(&spec.weight_dims(), wb, 0.3, seed, Distribution::Uniform).unwrap();
                let i = synth_tensor(&spec.image_dims(), ib, 0.5, seed + 1000, Distribution::Uniform).unwrap();
                let out = OutputFormat { bits: 16, exponent: 6 };
                let expect = reference_conv(&spec, &w, &i, out.bits, out.exponent).unwrap();
                for guarding in [false, true] {
                    let got = run_layer(&spec.clone().with_guarding(guarding), &w, &i, out).unwrap();
                    assert_eq!(got.output, expect, "w{wb} i{ib} k{k} s{stride} guard {guarding}");
                }
            }
        }
    }
}

#[test]
fn seven_bit_five_by_five() {
    let spec = LayerSpec::conv(3, 20, 24, 20, (5, 5)).with_bits(7, 7).with_guarding(true);
    let w = synth_tensor(&spec.weight_dims(), 7, 0.19, 5, Distribution::Laplace).unwrap();
    let i = synth_tensor(&spec.image_dims(), 7, 0.6, 6, Distribution::Uniform).unwrap();
    let out = OutputFormat { bits: 7, exponent: 4 };
    let got = run_layer(&spec, &w, &i, out).unwrap();
    assert_eq!(got.output, reference_conv(&spec, &w, &i, 7, 4).unwrap());
}

#[test]
fn identity_kernel_requantizes_input() {
    let spec = LayerSpec::conv(1, 6, 40, 1, (1, 1)).with_bits(8, 8);
    let w = pscnn::QTensor::new(vec![1, 1, 1, 1], 8, 0, vec![1]).unwrap();
    let i = synth_tensor(&spec.image_dims(), 8, 0.2, 3, Distribution::Uniform).unwrap();
    let got = run_layer(&spec, &w, &i, OutputFormat { bits: 8, exponent: 0 }).unwrap();
    assert_eq!(got.output.data, i.data);
}

#[test]
fn grouped_strided_padded_layer() {
    let spec = LayerSpec::conv(4, 17, 33, 6, (3, 5))
        .with_stride(2, 3)
        .with_pad(2)
        .with_groups(2)
        .with_bits(9, 4);
    let w = synth_tensor(&spec.weight_dims(), 9, 0.1, 8, Distribution::Uniform).unwrap();
    let i = synth_tensor(&spec.image_dims(), 4, 0.3, 9, Distribution::Uniform).unwrap();
    let out = OutputFormat { bits: 9, exponent: 3 };
    assert_eq!(
        run_layer(&spec, &w, &i, out).unwrap().output,
        reference_conv(&spec, &w, &i, 9, 3).unwrap()
    );
}
