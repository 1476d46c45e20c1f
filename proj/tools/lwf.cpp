#include "lwf/cli.hpp"

int main(int argc, char** argv)
{
    return lwf::cli_main(argc, argv);
}
