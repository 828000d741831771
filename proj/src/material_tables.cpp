// Generated from data/gold_johnson_christy.csv and data/silicon.csv; keep in sync.
#include "material_tables.hpp"

namespace patchant::detail {

const std::array<TablePoint, 49> kGoldJohnsonChristy = {{
    {187.8548, {0.227056, 3.041280}},
    {191.6294, {0.295191, 3.175920}},
    {195.2507, {0.292524, 3.285680}},
    {199.3315, {0.203899, 3.327660}},
    {203.2528, {0.138171, 3.396820}},
    {207.3314, {-0.010416, 3.390400}},
    {211.9388, {-0.132500, 3.510000}},
    {216.3773, {-0.233769, 3.606200}},
    {221.4003, {-0.346329, 3.710200}},
    {226.2485, {-0.415500, 3.825200}},
    {231.3138, {-0.551009, 3.892200}},
    {237.0635, {-0.616896, 4.055040}},
    {242.6305, {-0.744529, 4.163280}},
    {248.9642, {-0.891261, 4.338460}},
    {255.1115, {-1.080444, 4.490080}},
    {261.5700, {-1.236501, 4.722300}},
    {268.9462, {-1.346409, 4.976280}},
    {276.1341, {-1.366509, 5.282420}},
    {284.3674, {-1.332261, 5.494860}},
    {292.4155, {-1.306784, 5.596440}},
    {300.9325, {-1.227421, 5.780340}},
    {310.7373, {-1.242549, 5.792580}},
    {320.3726, {-1.230804, 5.845840}},
    {331.5085, {-1.355289, 5.573680}},
    {342.4978, {-1.310241, 5.538160}},
    {354.2406, {-1.231956, 5.598000}},
    {367.9056, {-1.400625, 5.609200}},
    {381.4898, {-1.604889, 5.644360}},
    {397.3852, {-1.649404, 5.738880}},
    {413.2806, {-1.702164, 5.717360}},
    {430.5007, {-1.692204, 5.649200}},
    {450.8516, {-1.758996, 5.282640}},
    {471.4228, {-1.702701, 4.844380}},
    {495.9368, {-2.278289, 3.812640}},
    {520.9420, {-3.946161, 2.580440}},
    {548.6026, {-5.842125, 2.111300}},
    {582.0854, {-8.112669, 1.660540}},
    {616.8368, {-10.661884, 1.374240}},
    {659.4904, {-13.648209, 1.035160}},
    {704.4556, {-16.817709, 1.066780}},
    {756.0012, {-20.610164, 1.271760}},
    {821.0874, {-25.811289, 1.626560}},
    {891.9726, {-32.040669, 1.925420}},
    {984.0015, {-40.274100, 2.794000}},
    {1087.5806, {-51.049600, 3.861000}},
    {1215.5313, {-66.218525, 5.701500}},
    {1393.0808, {-90.426461, 8.186340}},
    {1610.1843, {-125.350500, 12.555200}},
    {1937.2530, {-189.042000, 25.355200}},
}};

const std::array<TablePoint, 11> kSiliconTable = {{
    {400.0000, {30.875131, 4.311180}},
    {450.0000, {21.789300, 1.307600}},
    {500.0000, {18.484671, 0.627800}},
    {550.0000, {16.644719, 0.334560}},
    {600.0000, {15.522975, 0.197000}},
    {650.0000, {14.822244, 0.123200}},
    {700.0000, {14.288279, 0.083160}},
    {800.0000, {13.616058, 0.047970}},
    {900.0000, {13.176895, 0.015972}},
    {1000.0000, {12.744900, 0.003213}},
    {1100.0000, {12.531600, 0.000708}},
}};

}  // namespace patchant::detail
