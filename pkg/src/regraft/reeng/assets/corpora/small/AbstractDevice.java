abstract class AbstractDevice extends State {
}
