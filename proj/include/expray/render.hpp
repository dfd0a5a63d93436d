#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expray/dynamics.hpp"
#include "expray/param.hpp"
#include "expray/ray.hpp"

namespace expray {

struct ImageSpec {
    Complex center{0.0, 0.0};
    double width_units = 4.0;
    int width_px = 400;
    int height_px = 400;
    int max_iter = 256;
    double escape_re = 50.0;

    double units_per_px() const { return width_units / width_px; }
    Complex pixel_center(int ix, int iy) const;
    /// Floating pixel coordinates of a point (x right, y down).
    std::pair<double, double> to_pixel(const Complex& z) const;
};

/// Escape iteration counts per pixel; -1 where the orbit survived max_iter.
struct EscapeField {
    int width = 0, height = 0;
    std::vector<int32_t> iters;
    int32_t at(int ix, int iy) const { return iters[static_cast<size_t>(iy) * width + ix]; }
};

struct Image {
    int width = 0, height = 0;
    std::vector<uint8_t> gray;
};

/// Parameter plane: per-pixel kappa, iterate the singular orbit (0, e^kappa, ...).
EscapeField escape_field_parameter(const ImageSpec& spec);

/// Dynamical plane of a fixed kappa: per-pixel starting point.
EscapeField escape_field_dynamic(const Complex& kappa, const ImageSpec& spec);

/// Iteration-count grayscale ramp; non-escaping pixels are white.
Image field_to_image(const EscapeField& field, int max_iter);

/// Pixels covered by the polyline through the given points, clipped to the view.
std::vector<std::pair<int, int>> rasterize_polyline(const ImageSpec& spec,
                                                    const std::vector<Complex>& points);

void draw_polyline(Image& img, const ImageSpec& spec, const std::vector<Complex>& points,
                   uint8_t value = 0);

Image render_parameter_plane(const ImageSpec& spec, const std::vector<ParamTrace>& overlays);
Image render_dynamic_plane(const Complex& kappa, const ImageSpec& spec,
                           const std::vector<RayTrace>& overlays);

/// Binary 8-bit PPM (P6), gray written to all three channels.
std::string ppm_bytes(const Image& img);
void write_ppm(const Image& img, const std::string& path);

}  // namespace expray
