#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

struct IntConfig {
    unsigned modulus = 8;
};

struct SurfaceOptions {
    IntConfig ints;
    // Application as M;N;<y>.<x>.[y].x instead of N;M;<x>.x.
    bool function_first = false;
};

struct DesugarError : std::runtime_error {
    SrcPos pos;
    DesugarError(const std::string& msg, SrcPos p = {});
};

enum class SK {
    // statements
    Skip, Assign, Print, Seq, If, While, DoWhile, Try, Throw, Break, Return, CaseOf,
    // expressions
    Const, True, False, Deref, Read, Sample, BinOp, VarV, LamV, AppV, LetV, ReturnV, Ctor, CaseCBN,
};

struct SNode;
using SPtr = std::shared_ptr<const SNode>;

struct SParam {
    Identifier name;
    TypePtr type;  // null: taken from the data declaration
};

struct SBranch {
    ChoiceLabel label;            // constant label, or constructor
    std::vector<SParam> params;   // constructor patterns only
    SPtr body;
};

// Field use per kind:
//   Assign/Deref: name = location; Print/Return/ReturnV: kids[0]
//   Throw: label; Try: kids = {body, handler}, label; Const: num
//   BinOp: name = "+" or "<"; VarV: name; LamV: name, type, kids[0]
//   AppV: kids = {function, argument}; LetV: name, kids = {bound, body}
//   Ctor: label, kids = arguments; CaseOf/CaseCBN: kids[0], branches
struct SNode {
    SK kind = SK::Skip;
    std::string name;
    ChoiceLabel label;
    unsigned num = 0;
    TypePtr type;
    std::vector<SPtr> kids;
    std::vector<SBranch> branches;
    SrcPos pos;
};

struct DataDecl {
    std::string name;
    // Constructor label with argument types, first argument first.
    std::vector<std::pair<ChoiceLabel, std::vector<ValueType>>> ctors;
};

struct SurfaceProgram {
    SPtr body;
    std::vector<DataDecl> data;
    std::vector<std::pair<Location, ValueType>> cells;  // declared cell types
};

SurfaceProgram parse_surface(std::string_view src, const IntConfig& cfg = {});

Term desugar(const SurfaceProgram& p, const SurfaceOptions& opt = {});
Term desugar_source(std::string_view src, const SurfaceOptions& opt = {});
Term desugar_cbv(const SPtr& e, const SurfaceOptions& opt = {});
Term desugar_cbn_data(const DataDecl& decl, const SPtr& e, const SurfaceOptions& opt = {});

struct IntOps {
    Term plus;
    Term less;
    ValueType Z;
    ValueType B;
};
IntOps gen_intops(const IntConfig& cfg);

ChoiceLabel break_label();
ChoiceLabel return_label();
// Location names used by print, read and sample.
Location out_loc();
Location in_loc();
Location rnd_loc();

}  // namespace fmc
