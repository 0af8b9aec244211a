#ifndef VIDMARK_TRANSFORMS_HPP
#define VIDMARK_TRANSFORMS_HPP

#include "vidmark/linalg.hpp"

namespace vidmark {

// One level of the orthonormal 2-D Haar decomposition.
struct SubbandSet {
    Matrix ll;
    Matrix lh;
    Matrix hl;
    Matrix hh;
};

// Requires even width and height. Per 2x2 block [[a,b],[c,d]]:
//   ll=(a+b+c+d)/2  lh=(a-b+c-d)/2  hl=(a+b-c-d)/2  hh=(a-b-c+d)/2
// Energy is preserved (orthonormal normalization).
SubbandSet haar_forward(const Matrix& p);

// Exact inverse of haar_forward.
Matrix haar_inverse(const SubbandSet& s);

} // namespace vidmark

#endif
