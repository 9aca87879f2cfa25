// Placeholder; replaced by the real CLI once library modules are in.
int main() { return 2; }
