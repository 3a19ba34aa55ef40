#pragma once

// Fixed-width 5x7 bitmap font covering [0-9A-Za-z]. Each glyph is seven rows
// of five columns, '#' marks an inked pixel.

#include <array>
#include <string>
#include <string_view>

#include "mriforge/error.hpp"

namespace mriforge::font {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kGlyphAdvance = 6;  // one blank column between glyphs

using Glyph = std::array<std::string_view, kGlyphHeight>;

struct GlyphEntry {
  char ch;
  Glyph rows;
};

// clang-format off
inline constexpr GlyphEntry kGlyphs[] = {
  {'0', {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "}},
  {'1', {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
  {'2', {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"}},
  {'3', {"#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "}},
  {'4', {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "}},
  {'5', {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "}},
  {'6', {"  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "}},
  {'7', {"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "}},
  {'8', {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "}},
  {'9', {" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "}},
  {'A', {" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
  {'B', {"#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "}},
  {'C', {" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "}},
  {'D', {"###  ", "#  # ", "#   #", "#   #", "#   #", "#  # ", "###  "}},
  {'E', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}},
  {'F', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "}},
  {'G', {" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ####"}},
  {'H', {"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
  {'I', {" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
  {'J', {"  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "}},
  {'K', {"#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"}},
  {'L', {"#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"}},
  {'M', {"#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"}},
  {'N', {"#   #", "#   #", "##  #", "# # #", "#  ##", "#   #", "#   #"}},
  {'O', {" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
  {'P', {"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}},
  {'Q', {" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"}},
  {'R', {"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"}},
  {'S', {" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}},
  {'T', {"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}},
  {'U', {"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
  {'V', {"#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "}},
  {'W', {"#   #", "#   #", "#   #", "# # #", "# # #", "# # #", " # # "}},
  {'X', {"#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"}},
  {'Y', {"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "}},
  {'Z', {"#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"}},
  {'a', {"     ", "     ", " ### ", "    #", " ####", "#   #", " ####"}},
  {'b', {"#    ", "#    ", "# ## ", "##  #", "#   #", "#   #", "#### "}},
  {'c', {"     ", "     ", " ### ", "#    ", "#    ", "#   #", " ### "}},
  {'d', {"    #", "    #", " ## #", "#  ##", "#   #", "#   #", " ####"}},
  {'e', {"     ", "     ", " ### ", "#   #", "#####", "#    ", " ### "}},
  {'f', {"  ## ", " #  #", " #   ", "###  ", " #   ", " #   ", " #   "}},
  {'g', {"     ", " ####", "#   #", "#   #", " ####", "    #", " ### "}},
  {'h', {"#    ", "#    ", "# ## ", "##  #", "#   #", "#   #", "#   #"}},
  {'i', {"  #  ", "     ", " ##  ", "  #  ", "  #  ", "  #  ", " ### "}},
  {'j', {"   # ", "     ", "  ## ", "   # ", "   # ", "#  # ", " ##  "}},
  {'k', {"#    ", "#    ", "#  # ", "# #  ", "##   ", "# #  ", "#  # "}},
  {'l', {" ##  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
  {'m', {"     ", "     ", "## # ", "# # #", "# # #", "#   #", "#   #"}},
  {'n', {"     ", "     ", "# ## ", "##  #", "#   #", "#   #", "#   #"}},
  {'o', {"     ", "     ", " ### ", "#   #", "#   #", "#   #", " ### "}},
  {'p', {"     ", "     ", "#### ", "#   #", "#### ", "#    ", "#    "}},
  {'q', {"     ", "     ", " ## #", "#  ##", " ####", "    #", "    #"}},
  {'r', {"     ", "     ", "# ## ", "##  #", "#    ", "#    ", "#    "}},
  {'s', {"     ", "     ", " ####", "#    ", " ### ", "    #", "#### "}},
  {'t', {" #   ", " #   ", "###  ", " #   ", " #   ", " #  #", "  ## "}},
  {'u', {"     ", "     ", "#   #", "#   #", "#   #", "#  ##", " ## #"}},
  {'v', {"     ", "     ", "#   #", "#   #", "#   #", " # # ", "  #  "}},
  {'w', {"     ", "     ", "#   #", "#   #", "# # #", "# # #", " # # "}},
  {'x', {"     ", "     ", "#   #", " # # ", "  #  ", " # # ", "#   #"}},
  {'y', {"     ", "     ", "#   #", "#   #", " ####", "    #", " ### "}},
  {'z', {"     ", "     ", "#####", "   # ", "  #  ", " #   ", "#####"}},
};
// clang-format on

inline const Glyph& glyph(char ch) {
  for (const auto& g : kGlyphs) {
    if (g.ch == ch) return g.rows;
  }
  throw InvalidArgument(std::string("no glyph for character '") + ch + "'");
}

}  // namespace mriforge::font
