#pragma once

#include <Eigen/Dense>

#include "srce/error.hpp"
#include "srce/ofdm/channel.hpp"

namespace srce::data {

using Plane = Eigen::MatrixXd;

struct PlanePair {
    Plane real_plane;
    Plane imag_plane;

    bool operator==(const PlanePair& o) const {
        return real_plane.rows() == o.real_plane.rows() && real_plane.cols() == o.real_plane.cols() &&
               imag_plane.rows() == o.imag_plane.rows() && imag_plane.cols() == o.imag_plane.cols() &&
               real_plane == o.real_plane && imag_plane == o.imag_plane;
    }
};

inline PlanePair complex_to_planes(const ofdm::ChannelMatrix& h) {
    if (!h.allFinite()) throw InputError("complex_to_planes: non-finite channel entries");
    return {h.real(), h.imag()};
}

inline ofdm::ChannelMatrix planes_to_complex(const PlanePair& p) {
    if (p.real_plane.rows() != p.imag_plane.rows() || p.real_plane.cols() != p.imag_plane.cols())
        throw InputError("planes_to_complex: plane dimensions differ");
    ofdm::ChannelMatrix h(p.real_plane.rows(), p.real_plane.cols());
    h.real() = p.real_plane;
    h.imag() = p.imag_plane;
    return h;
}

}  // namespace srce::data
