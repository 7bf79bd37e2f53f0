// Generated by tools/gen_quadrature.py; do not edit by hand.
#pragma once

#include <array>

namespace emacfem::detail {

struct TableNode {
  double xi;
  double eta;
  double weight;
};

struct LineNode {
  double s;
  double weight;
};

inline constexpr std::array<TableNode, 4> kConical2{{
    {0.1550510257216822, 0.17855872826361643, 0.15902069087198858},
    {0.1550510257216822, 0.66639024601470143, 0.15902069087198858},
    {0.64494897427831777, 0.075031110222608124, 0.090979309128011415},
    {0.64494897427831777, 0.28001991549907407, 0.090979309128011415},
}};

inline constexpr std::array<TableNode, 9> kConical3{{
    {0.088587959512703943, 0.10271765480962627, 0.055814420483044344},
    {0.088587959512703943, 0.45570602024364804, 0.089303072772870945},
    {0.088587959512703943, 0.80869438567766982, 0.055814420483044344},
    {0.40946686444073471, 0.06655406783916451, 0.063678085099885068},
    {0.40946686444073471, 0.29526656777963267, 0.10188493615981611},
    {0.40946686444073471, 0.52397906772010083, 0.063678085099885068},
    {0.787659461760847, 0.02393113228708062, 0.01939638330595948},
    {0.787659461760847, 0.10617026911957647, 0.031034213289535165},
    {0.787659461760847, 0.18840940595207231, 0.01939638330595948},
}};

inline constexpr std::array<TableNode, 16> kConical4{{
    {0.057104196114517683, 0.065466994555014466, 0.023568368193382334},
    {0.057104196114517683, 0.31116455224435702, 0.044185088522361728},
    {0.057104196114517683, 0.63173125164112531, 0.044185088522361728},
    {0.057104196114517683, 0.87742880933046785, 0.023568368193382334},
    {0.2768430136381238, 0.050210123211369771, 0.035388067898085948},
    {0.2768430136381238, 0.23864865973144292, 0.066344216107049728},
    {0.2768430136381238, 0.48450832663043325, 0.066344216107049728},
    {0.2768430136381238, 0.67294686315050645, 0.035388067898085948},
    {0.58359043236891683, 0.028912084224389012, 0.022584049282369931},
    {0.58359043236891683, 0.13741910413457437, 0.042339724521746287},
    {0.58359043236891683, 0.2789904634965088, 0.042339724521746287},
    {0.58359043236891683, 0.38749748340669415, 0.022584049282369931},
    {0.86024013565621948, 0.0097037851269461128, 0.0054232259105252544},
    {0.86024013565621948, 0.046122079906452049, 0.010167259564478786},
    {0.86024013565621948, 0.093637784437328508, 0.010167259564478786},
    {0.86024013565621948, 0.13005607921683443, 0.0054232259105252544},
}};

inline constexpr std::array<TableNode, 25> kConical5{{
    {0.039809857051468743, 0.045042593569803724, 0.011465080351592548},
    {0.039809857051468743, 0.22157860955237921, 0.023161221929498387},
    {0.039809857051468743, 0.48009507147426561, 0.027528985664469811},
    {0.039809857051468743, 0.73861153339615204, 0.023161221929498387},
    {0.039809857051468743, 0.91514754937872755, 0.011465080351592548},
    {0.19801341787360818, 0.03762125234511119, 0.019804083132047352},
    {0.19801341787360818, 0.18507071026738944, 0.040007287386160426},
    {0.19801341787360818, 0.40099329106319592, 0.047551897057954012},
    {0.19801341787360818, 0.61691587185900243, 0.040007287386160426},
    {0.19801341787360818, 0.76436532978128069, 0.019804083132047352},
    {0.43797481024738616, 0.026364644944470918, 0.0173415064313657},
    {0.43797481024738616, 0.12969593678225413, 0.035032504503371718},
    {0.43797481024738616, 0.28101259487630692, 0.041638965215194966},
    {0.43797481024738616, 0.43232925297035973, 0.035032504503371718},
    {0.43797481024738616, 0.53566054480814296, 0.0173415064313657},
    {0.69546427335363614, 0.014285794395571386, 0.0087554991821638325},
    {0.69546427335363614, 0.070276292008281727, 0.017687452110483465},
    {0.69546427335363614, 0.15226786332318196, 0.021022967487322075},
    {0.69546427335363614, 0.23425943463808219, 0.017687452110483465},
    {0.69546427335363614, 0.29024993225079254, 0.0087554991821638325},
    {0.90146491420117358, 0.0046222884650464289, 0.0018655521668778385},
    {0.90146491420117358, 0.022738483063764036, 0.0037687016953276203},
    {0.90146491420117358, 0.049267542899413215, 0.0044794067972813581},
    {0.90146491420117358, 0.075796602735062391, 0.0037687016953276203},
    {0.90146491420117358, 0.093912797333779996, 0.0018655521668778385},
}};

inline constexpr std::array<TableNode, 36> kConical6{{
    {0.029316427159784893, 0.032775366614459893, 0.0061942653526588501},
    {0.029316427159784893, 0.16442924159482744, 0.013043394330082831},
    {0.029316427159784893, 0.36952992437237669, 0.01691750568001266},
    {0.029316427159784893, 0.60115364846783836, 0.01691750568001266},
    {0.029316427159784893, 0.8062543312453877, 0.013043394330082831},
    {0.029316427159784893, 0.93790820622575521, 0.0061942653526588501},
    {0.1480785996684843, 0.028765333012559128, 0.011610874766997514},
    {0.1480785996684843, 0.14431148695041665, 0.024449262258057814},
    {0.1480785996684843, 0.32431830458877603, 0.031711111590703979},
    {0.1480785996684843, 0.52760309574273967, 0.031711111590703979},
    {0.1480785996684843, 0.70760991338109902, 0.024449262258057814},
    {0.1480785996684843, 0.82315606731895663, 0.011610874766997514},
    {0.3369846902811543, 0.022386872978030634, 0.012060606404265109},
    {0.3369846902811543, 0.1123116817809537, 0.025396271589047656},
    {0.3369846902811543, 0.25240356807651804, 0.032939398900786697},
    {0.3369846902811543, 0.41061174164232767, 0.032939398900786697},
    {0.3369846902811543, 0.55070362793789196, 0.025396271589047656},
    {0.3369846902811543, 0.64062843674081504, 0.012060606404265109},
    {0.55867151877155008, 0.01490156336667116, 0.0084515357969431222},
    {0.55867151877155008, 0.074758973462649092, 0.017796575997026276},
    {0.55867151877155008, 0.16800951912119186, 0.023082463651358232},
    {0.55867151877155008, 0.27331896210725803, 0.023082463651358232},
    {0.55867151877155008, 0.36656950776580077, 0.017796575997026276},
    {0.55867151877155008, 0.42642691786177872, 0.0084515357969431222},
    {0.7692338620300545, 0.0077918747012864324, 0.0037652982126916731},
    {0.7692338620300545, 0.039090700732824245, 0.0079286673337964839},
    {0.7692338620300545, 0.087850454975997194, 0.010283617228766331},
    {0.7692338620300545, 0.1429156829939483, 0.010283617228766331},
    {0.7692338620300545, 0.19167543723712124, 0.0079286673337964839},
    {0.7692338620300545, 0.22297426326865907, 0.0037652982126916731},
    {0.92694567131974115, 0.0024666971526702431, 0.00074854256123631831},
    {0.92694567131974115, 0.012375060417440038, 0.0015762217540235886},
    {0.92694567131974115, 0.02781108211536058, 0.0020443865915448591},
    {0.92694567131974115, 0.045243246564898303, 0.0020443865915448591},
    {0.92694567131974115, 0.060679268262818845, 0.0015762217540235886},
    {0.92694567131974115, 0.070587631527588637, 0.00074854256123631831},
}};

inline constexpr std::array<LineNode, 1> kGauss1{{
    {0.5, 1},
}};

inline constexpr std::array<LineNode, 2> kGauss2{{
    {0.21132486540518711, 0.5},
    {0.78867513459481287, 0.5},
}};

inline constexpr std::array<LineNode, 3> kGauss3{{
    {0.11270166537925831, 0.27777777777777779},
    {0.5, 0.44444444444444442},
    {0.8872983346207417, 0.27777777777777779},
}};

inline constexpr std::array<LineNode, 4> kGauss4{{
    {0.069431844202973714, 0.17392742256872692},
    {0.33000947820757187, 0.32607257743127305},
    {0.66999052179242813, 0.32607257743127305},
    {0.93056815579702634, 0.17392742256872692},
}};

inline constexpr std::array<LineNode, 5> kGauss5{{
    {0.046910077030668004, 0.11846344252809454},
    {0.23076534494715845, 0.23931433524968324},
    {0.5, 0.28444444444444444},
    {0.7692346550528415, 0.23931433524968324},
    {0.95308992296933204, 0.11846344252809454},
}};

inline constexpr std::array<LineNode, 6> kGauss6{{
    {0.033765242898423989, 0.085662246189585178},
    {0.16939530676686773, 0.1803807865240693},
    {0.38069040695840156, 0.23395696728634552},
    {0.61930959304159849, 0.23395696728634552},
    {0.83060469323313224, 0.1803807865240693},
    {0.96623475710157603, 0.085662246189585178},
}};

}  // namespace emacfem::detail
