public class Stats {
    int count;
}
