#pragma once

#include <array>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dipres/field_model.hpp"
#include "dipres/tube_lens.hpp"

namespace dipres {

enum class Channel {
  direct,
  iii_out1,
  iii_out2,
  r_iii_out1,
  r_iii_out2,
  phi_iii_out1,
  phi_iii_out2,
};

enum class Modality {
  direct,
  iii,       ///< unpolarized image inversion interferometer
  r_iii,     ///< radially polarized light into an III, azimuthal light discarded
  phi_iii,   ///< azimuthally polarized light into an III, radial light discarded
  rphi_iii,  ///< both polarized IIIs
};

/// Groups of channels that share one normalization.
enum class ImageSet { direct, iii, polarized };

std::string_view channel_name(Channel c);
std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view name);
ImageSet image_set_of(Modality m);
std::vector<Channel> channels_of(ImageSet set);
std::vector<Channel> channels_of(Modality m);
inline constexpr std::array<Modality, 5> kAllModalities{
    Modality::direct, Modality::iii, Modality::r_iii, Modality::phi_iii, Modality::rphi_iii};

/// Probability density per unit object-projected area (nm^-2).
struct DetectorImage {
  ImageGrid grid;
  Channel channel = Channel::direct;
  std::vector<double> density;

  double integral() const;
};

struct ImagePair {
  DetectorImage image;
  std::vector<double> dimage_dl;  ///< nm^-3

  double derivative_integral() const;
};

/// Tag for a pair of isotropic emitters (x, y, z dipoles weighted 1:1:zeta).
struct Isotropic {};
using Emitter = std::variant<DipoleOrientation, Isotropic>;

/// Pupil-plane outputs of the image inversion interferometer:
///   out1 = (E(-x,-y) - E(x,y)) / 2,   out2 = i (E(-x,y) + E(x,-y)) / 2.
struct InterferometerOutputs {
  ComplexArray out1;
  ComplexArray out2;
};
InterferometerOutputs iii_fields(std::span<const Complex> field, int side);

/// Detector-plane densities of every measurement scheme. Owns a TubeLens, so
/// an instance must not be shared between threads; the functions are otherwise
/// pure in (orientation, l).
class ImagingModel {
 public:
  explicit ImagingModel(const OpticalConfig& cfg);

  const OpticalConfig& config() const { return cfg_; }
  const PupilGrid& pupil_grid() const { return lens_.pupil_grid(); }
  const ImageGrid& image_grid() const { return lens_.image_grid(); }
  TubeLens& lens() { return lens_; }
  double zeta() const { return zeta_; }

  /// Incoherent sum of the two dipole images, normalized to unit integral.
  ImagePair direct_image(const DipoleOrientation& orientation, double separation_nm);
  /// Outputs 1 and 2 of the unpolarized III, jointly normalized.
  std::array<ImagePair, 2> iii_images(const DipoleOrientation& orientation, double separation_nm);
  /// r-III outputs 1, 2 then phi-III outputs 1, 2, sharing one normalization.
  std::array<ImagePair, 4> polarized_iii_images(const DipoleOrientation& orientation,
                                                double separation_nm);

  /// Channel images of `set` for a fixed orientation or an isotropic pair.
  std::vector<ImagePair> channel_images(const Emitter& emitter, double separation_nm,
                                        ImageSet set);
  /// Weighted (1, 1, zeta) / (2 + zeta) sum of the x, y and z dipole images.
  std::vector<ImagePair> isotropic_images(double separation_nm, ImageSet set);

 private:
  std::vector<ImagePair> orientation_images(const DipoleOrientation& orientation,
                                            double separation_nm, ImageSet set);

  OpticalConfig cfg_;
  TubeLens lens_;
  double zeta_;
};

}  // namespace dipres
